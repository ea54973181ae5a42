#include "mpx/formats.hpp"

namespace mpx {

const FloatFormat& FloatFormat::half() {
  static const FloatFormat f(16, 5, 10);
  return f;
}

const FloatFormat& FloatFormat::single() {
  static const FloatFormat f(32, 8, 23);
  return f;
}

const FloatFormat& FloatFormat::float64() {
  static const FloatFormat f(64, 11, 52);
  return f;
}

const FloatFormat& FloatFormat::quadruple() {
  static const FloatFormat f(128, 15, 112);
  return f;
}

const FloatFormat& FloatFormat::octuple() {
  static const FloatFormat f(256, 19, 236);
  return f;
}

FloatFormat FloatFormat::by_name(const std::string& name) {
  if (name == "half" || name == "float16") return half();
  if (name == "single" || name == "float32") return single();
  if (name == "double" || name == "float64") return float64();
  if (name == "quadruple" || name == "float128") return quadruple();
  if (name == "octuple" || name == "float256") return octuple();
  // custom e<E>f<F>
  if (name.size() >= 4 && name[0] == 'e') {
    auto fpos = name.find('f');
    if (fpos != std::string::npos && fpos > 1) {
      try {
        int e = std::stoi(name.substr(1, fpos - 1));
        int f = std::stoi(name.substr(fpos + 1));
        return FloatFormat(1 + e + f, e, f);
      } catch (const std::exception&) {
        // fall through
      }
    }
  }
  throw std::invalid_argument("unknown float format: " + name);
}

std::string FloatFormat::name() const {
  if (*this == half()) return "half";
  if (*this == single()) return "single";
  if (*this == float64()) return "double";
  if (*this == quadruple()) return "quadruple";
  if (*this == octuple()) return "octuple";
  return "e" + std::to_string(exponent_bits) + "f" + std::to_string(fraction_bits);
}

} // namespace mpx
