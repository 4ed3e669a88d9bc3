#include "fractal/scalar.hpp"

#include <cctype>

namespace fractal {

Rational parse_rational(std::string_view text) {
    std::string s;
    for (char ch : text)
        if (!std::isspace(static_cast<unsigned char>(ch))) s.push_back(ch);
    if (s.empty()) throw ConfigError("empty rational literal");
    try {
        const auto slash = s.find('/');
        if (slash != std::string::npos) {
            const Integer num(s.substr(0, slash));
            const Integer den(s.substr(slash + 1));
            if (den == 0) throw ConfigError("zero denominator in '" + s + "'");
            return Rational(num, den);
        }
        const auto dot = s.find('.');
        if (dot != std::string::npos) {
            std::string digits = s.substr(0, dot) + s.substr(dot + 1);
            Integer den = 1;
            for (std::size_t i = dot + 1; i < s.size(); ++i) den *= 10;
            if (digits.empty() || digits == "-" || digits == "+") throw ConfigError("bad decimal '" + s + "'");
            return Rational(Integer(digits), den);
        }
        return Rational(Integer(s));
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception&) {
        throw ConfigError("cannot parse rational '" + s + "'");
    }
}

std::string to_string(const Rational& q) { return q.str(); }

}  // namespace fractal
