#include "mpx/bit_pattern.hpp"

#include <algorithm>
#include <cctype>
#include <stdexcept>

namespace mpx {

BitPattern::BitPattern(int w, mpz_class v) : width(w), value(std::move(v)) {
  if (w <= 0) throw std::invalid_argument("BitPattern: width must be positive");
  if (sgn(value) < 0) throw std::invalid_argument("BitPattern: value must be non-negative");
  if (value != 0 && mpz_sizeinbase(value.get_mpz_t(), 2) > static_cast<size_t>(w)) {
    throw std::invalid_argument("BitPattern: value does not fit in width");
  }
}

BitPattern BitPattern::from_u64(int width, uint64_t bits) {
  mpz_class v;
  mpz_import(v.get_mpz_t(), 1, 1, sizeof(bits), 0, 0, &bits);
  return BitPattern(width, v);
}

uint64_t BitPattern::as_u64() const {
  if (width > 64) throw std::logic_error("BitPattern::as_u64: width > 64");
  uint64_t out = 0;
  mpz_class v = value;
  for (int i = 0; i < 64 && v != 0; i += 8) {
    out |= static_cast<uint64_t>(mpz_class(v & 0xff).get_ui()) << i;
    v >>= 8;
  }
  return out;
}

mpz_class bit_field(const BitPattern& p, int lo, int len) {
  mpz_class shifted = p.value >> lo;
  mpz_class mask = (mpz_class(1) << len) - 1;
  return shifted & mask;
}

std::string format_pattern(const BitPattern& p, const FloatFormat& fmt) {
  if (p.width != fmt.total_bits) throw std::invalid_argument("format_pattern: width mismatch");
  std::string out;
  out.reserve(fmt.total_bits + 2);
  for (int i = fmt.total_bits - 1; i >= 0; --i) {
    out.push_back(p.bit(i) ? '1' : '0');
    if (i == fmt.total_bits - 1 || i == fmt.fraction_bits) out.push_back(' ');
  }
  return out;
}

std::string format_pattern_hex(const BitPattern& p) {
  int hex_digits = (p.width + 3) / 4;
  std::string digits = p.value.get_str(16);
  if (static_cast<int>(digits.size()) < hex_digits) {
    digits.insert(0, hex_digits - digits.size(), '0');
  }
  return "0x" + digits;
}

BitPattern parse_pattern(const std::string& text, const FloatFormat& fmt) {
  std::string s;
  for (char c : text) {
    if (!std::isspace(static_cast<unsigned char>(c)) && c != '_') s.push_back(c);
  }
  if (s.size() > 2 && (s[0] == '0') && (s[1] == 'x' || s[1] == 'X')) {
    mpz_class v;
    if (mpz_set_str(v.get_mpz_t(), s.c_str() + 2, 16) != 0) {
      throw std::invalid_argument("bad hex pattern: " + text);
    }
    if (mpz_sizeinbase(v.get_mpz_t(), 2) > static_cast<size_t>(fmt.total_bits) && v != 0) {
      throw std::invalid_argument("hex pattern wider than format: " + text);
    }
    return BitPattern(fmt.total_bits, v);
  }
  if (s.empty() || s.find_first_not_of("01") != std::string::npos) {
    throw std::invalid_argument("bad bit pattern: " + text);
  }
  if (static_cast<int>(s.size()) != fmt.total_bits) {
    throw std::invalid_argument("pattern has " + std::to_string(s.size()) + " bits, format needs " +
                                std::to_string(fmt.total_bits));
  }
  mpz_class v;
  mpz_set_str(v.get_mpz_t(), s.c_str(), 2);
  return BitPattern(fmt.total_bits, v);
}

bool looks_like_pattern(const std::string& text, const FloatFormat& fmt) {
  std::string s;
  for (char c : text) {
    if (!std::isspace(static_cast<unsigned char>(c)) && c != '_') s.push_back(c);
  }
  if (s.size() > 2 && s[0] == '0' && (s[1] == 'x' || s[1] == 'X')) return true;
  return static_cast<int>(s.size()) == fmt.total_bits &&
         s.find_first_not_of("01") == std::string::npos;
}

} // namespace mpx
