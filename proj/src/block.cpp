#include "optsmart/block.hpp"

#include <openssl/evp.h>

#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "optsmart/errors.hpp"

namespace optsmart {

void writeBlock(std::ostream& out, const Block& block) {
  out << "[AUS]\n";
  writeAus(out, block.aus);
  out << "[INITSTATE]\n";
  for (std::size_t i = 0; i < block.initialState.size(); ++i)
    out << i << ' ' << block.initialState[i] << '\n';
  out << "[CONCBIN]\n";
  for (AuId id : block.concBin) out << id << '\n';
  out << "[BG]\n";
  writeBg(out, block.bg);
  out << "[PREVHASH]\n" << toHex(block.prevHash) << '\n';
  out << "[FINALSTATE]\n";
  for (std::size_t i = 0; i < block.finalState.size(); ++i)
    out << i << ' ' << block.finalState[i] << '\n';
}

std::string serializeBlock(const Block& block) {
  std::ostringstream out;
  writeBlock(out, block);
  return out.str();
}

namespace {

std::int64_t parseInt(const std::string& s, std::size_t lineNo) {
  try {
    std::size_t used = 0;
    long long v = std::stoll(s, &used);
    if (used == s.size()) return v;
  } catch (const std::exception&) {
  }
  throw ParseError(lineNo, "bad integer '" + s + "'");
}

void parseDense(const std::string& line, std::size_t lineNo, std::vector<Value>& into) {
  std::istringstream fields(line);
  std::string obj, val, extra;
  if (!(fields >> obj >> val) || (fields >> extra)) throw ParseError(lineNo, "expected `obj value`");
  if (parseInt(obj, lineNo) != static_cast<std::int64_t>(into.size()))
    throw ParseError(lineNo, "objects must be listed densely in order");
  into.push_back(parseInt(val, lineNo));
}

}  // namespace

Block readBlock(std::istream& in) {
  Block block;
  std::string line, section;
  std::size_t lineNo = 0, bgFirst = 0;
  std::vector<std::string> bgLines;
  bool sawHash = false;
  while (std::getline(in, line)) {
    ++lineNo;
    if (!line.empty() && line.front() == '[') {
      section = line;
      if (section == "[BG]") bgFirst = lineNo + 1;
      continue;
    }
    if (section == "[BG]") {
      bgLines.push_back(line);
      continue;
    }
    if (line.empty()) continue;
    if (section == "[AUS]") {
      block.aus.push_back(parseAu(line, lineNo));
      if (block.aus.back().auId != static_cast<AuId>(block.aus.size() - 1))
        throw ParseError(lineNo, "AU ids must be 0..n-1 in order");
    } else if (section == "[INITSTATE]") {
      parseDense(line, lineNo, block.initialState);
    } else if (section == "[CONCBIN]") {
      const AuId id = parseInt(line, lineNo);
      if (!block.concBin.empty() && block.concBin.back() >= id)
        throw ParseError(lineNo, "bin must be strictly ascending");
      block.concBin.push_back(id);
    } else if (section == "[PREVHASH]") {
      if (sawHash) throw ParseError(lineNo, "more than one previous hash");
      try {
        block.prevHash = digestFromHex(line);
      } catch (const InputError& e) {
        throw ParseError(lineNo, e.what());
      }
      sawHash = true;
    } else if (section == "[FINALSTATE]") {
      parseDense(line, lineNo, block.finalState);
    } else {
      throw ParseError(lineNo, "record outside a known section");
    }
  }
  if (bgFirst == 0) throw ParseError(lineNo, "missing [BG] section");
  if (!sawHash) throw ParseError(lineNo, "missing [PREVHASH] section");
  block.bg = parseBg(bgLines, bgFirst);
  return block;
}

Block parseBlock(const std::string& text) {
  std::istringstream in(text);
  return readBlock(in);
}

Digest sha256(const std::string& bytes) {
  Digest d{};
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), d.data(), &len, EVP_sha256(), nullptr) != 1 ||
      len != d.size())
    throw std::runtime_error("SHA-256 computation failed");
  return d;
}

Digest blockDigest(const Block& block) { return sha256(serializeBlock(block)); }

std::string toHex(const Digest& d) {
  static constexpr char kHex[] = "0123456789abcdef";
  std::string s;
  s.reserve(64);
  for (auto b : d) {
    s.push_back(kHex[b >> 4]);
    s.push_back(kHex[b & 0xF]);
  }
  return s;
}

Digest digestFromHex(const std::string& hex) {
  if (hex.size() != 64) throw InputError("digest must be 64 hex characters");
  auto nibble = [](char c) -> int {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    throw InputError(std::string("bad hex digit '") + c + "'");
  };
  Digest d{};
  for (std::size_t i = 0; i < d.size(); ++i)
    d[i] = static_cast<std::uint8_t>(nibble(hex[2 * i]) << 4 | nibble(hex[2 * i + 1]));
  return d;
}

}  // namespace optsmart
