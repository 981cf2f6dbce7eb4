#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>

namespace tplscan {

// The closed 64-mnemonic opcode alphabet of the bundle format. Features read
// only mnemonic identity, so the byte value of a mnemonic is its table index.
inline constexpr std::array<std::string_view, 64> kOpcodeTable = {
    "nop",       "push",       "pop",        "dup",       "swap",     "ldc",
    "ldnull",    "load",       "store",      "ldfield",   "stfield",  "ldstatic",
    "ststatic",  "aload",      "astore",     "arrlen",    "add",      "sub",
    "mul",       "div",        "rem",        "neg",       "inc",      "dec",
    "shl",       "shr",        "ushr",       "and",       "or",       "xor",
    "not",       "cmp",        "cmpeq",      "cmpne",     "cmplt",    "cmple",
    "cmpgt",     "cmpge",      "br",         "brtrue",    "brfalse",  "tswitch",
    "lswitch",   "ret",        "retval",     "throw",     "call",     "callvirt",
    "callstatic","calliface",  "newobj",     "newarr",    "i2f",      "f2i",
    "i2l",       "l2i",        "i2c",        "f2d",       "d2f",      "checkcast",
    "instanceof","monenter",   "monexit",    "halt"};

inline constexpr std::uint8_t kNopByte = 0;

inline std::optional<std::uint8_t> opcode_byte(std::string_view mnemonic) {
  static const std::unordered_map<std::string_view, std::uint8_t> index = [] {
    std::unordered_map<std::string_view, std::uint8_t> m;
    for (std::size_t i = 0; i < kOpcodeTable.size(); ++i)
      m.emplace(kOpcodeTable[i], static_cast<std::uint8_t>(i));
    return m;
  }();
  auto it = index.find(mnemonic);
  if (it == index.end()) return std::nullopt;
  return it->second;
}

inline std::string_view opcode_name(std::uint8_t byte) { return kOpcodeTable[byte & 63]; }

// Symbol alphabet for fuzzy-digest characters.
inline constexpr std::string_view kDigestAlphabet =
    "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

}  // namespace tplscan
