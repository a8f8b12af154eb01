#include "bagsched/rational.hpp"

#include <cctype>

namespace bagsched {

namespace {

bool valid_int_token(const std::string& s) {
    if (s.empty()) return false;
    std::size_t i = (s[0] == '-' || s[0] == '+') ? 1 : 0;
    if (i == s.size()) return false;
    for (; i < s.size(); ++i)
        if (!std::isdigit(static_cast<unsigned char>(s[i]))) return false;
    return true;
}

}  // namespace

Rat parse_rat(const std::string& s) {
    auto slash = s.find('/');
    if (slash == std::string::npos) {
        if (!valid_int_token(s)) throw std::invalid_argument("not a rational: '" + s + "'");
        return Rat(Int(s));
    }
    std::string num = s.substr(0, slash), den = s.substr(slash + 1);
    if (!valid_int_token(num) || !valid_int_token(den))
        throw std::invalid_argument("not a rational: '" + s + "'");
    Int d(den);
    if (d == 0) throw std::invalid_argument("zero denominator: '" + s + "'");
    return Rat(Int(num), d);
}

std::string rat_string(const Rat& x) {
    if (denominator(x) == 1) return numerator(x).str();
    return numerator(x).str() + "/" + denominator(x).str();
}

}  // namespace bagsched
