#include "csm/rational.hpp"

#include <cctype>
#include <cstdlib>

#include "csm/errors.hpp"

namespace csm {

Rational rational_from_double(double x) {
    Rational q;
    mpq_set_d(q.get_mpq_t(), x);
    return q;
}

Rational rational_from_decimal(const std::string& text) {
    std::string s;
    for (char c : text)
        if (!std::isspace(static_cast<unsigned char>(c))) s.push_back(c);
    if (s.empty()) throw ParseError("empty numeric literal");

    bool neg = false;
    std::size_t i = 0;
    if (s[i] == '+' || s[i] == '-') {
        neg = (s[i] == '-');
        ++i;
    }
    std::string digits;
    long frac_digits = 0;
    long exponent = 0;
    bool seen_dot = false, seen_digit = false;
    for (; i < s.size(); ++i) {
        char c = s[i];
        if (std::isdigit(static_cast<unsigned char>(c))) {
            digits.push_back(c);
            if (seen_dot) ++frac_digits;
            seen_digit = true;
        } else if (c == '.') {
            if (seen_dot) throw ParseError("bad numeric literal: " + text);
            seen_dot = true;
        } else if (c == 'e' || c == 'E') {
            ++i;
            bool eneg = false;
            if (i < s.size() && (s[i] == '+' || s[i] == '-')) {
                eneg = (s[i] == '-');
                ++i;
            }
            if (i >= s.size()) throw ParseError("bad exponent: " + text);
            long e = 0;
            for (; i < s.size(); ++i) {
                if (!std::isdigit(static_cast<unsigned char>(s[i])))
                    throw ParseError("bad exponent: " + text);
                e = e * 10 + (s[i] - '0');
            }
            exponent = eneg ? -e : e;
            break;
        } else {
            throw ParseError("bad numeric literal: " + text);
        }
    }
    if (!seen_digit) throw ParseError("bad numeric literal: " + text);
    if (digits.empty()) digits = "0";

    mpz_class num(digits, 10);
    if (neg) num = -num;
    long p10 = exponent - frac_digits;
    mpz_class scale;
    mpz_ui_pow_ui(scale.get_mpz_t(), 10, static_cast<unsigned long>(p10 < 0 ? -p10 : p10));
    Rational q;
    if (p10 >= 0)
        q = Rational(num * scale);
    else
        q = Rational(num, scale);
    q.canonicalize();
    return q;
}

double to_double(const Rational& q) { return mpq_get_d(q.get_mpq_t()); }

std::string to_string(const Rational& q) { return q.get_str(); }

std::vector<Rational> rationalize(const std::vector<double>& v) {
    std::vector<Rational> out;
    out.reserve(v.size());
    for (double x : v) out.push_back(rational_from_double(x));
    return out;
}

}  // namespace csm
