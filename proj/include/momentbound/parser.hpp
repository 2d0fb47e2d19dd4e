#pragma once

#include "momentbound/polynomial.hpp"

#include <cctype>
#include <stdexcept>
#include <string>
#include <vector>

namespace momentbound {

struct ParseError : std::runtime_error {
    ParseError(const std::string& msg, size_t pos)
        : std::runtime_error(msg + " at position " + std::to_string(pos)), position(pos) {}
    size_t position;
};

// Recursive-descent parser for the expression grammar
//   expr   := ['-'] term (('+'|'-') term)*
//   term   := factor ('*' factor)*
//   factor := base ('^' uint)?
//   base   := rational | identifier | '(' expr ')'
// Rationals may be integers, fractions "p/q", or decimal literals (converted
// exactly). Whitespace is insignificant. There is no implicit multiplication.
class PolynomialParser {
public:
    PolynomialParser(const std::string& text, const std::vector<std::string>& vars)
        : text_(text), vars_(vars) {}

    Polynomial parse() {
        Polynomial p = parse_expr();
        skip_ws();
        if (pos_ != text_.size()) throw ParseError("unexpected trailing input", pos_);
        return p;
    }

private:
    int n() const { return static_cast<int>(vars_.size()); }

    void skip_ws() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }

    bool eat(char c) {
        skip_ws();
        if (pos_ < text_.size() && text_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    char peek() {
        skip_ws();
        return pos_ < text_.size() ? text_[pos_] : '\0';
    }

    Polynomial parse_expr() {
        bool neg = false;
        skip_ws();
        if (eat('-'))
            neg = true;
        else
            eat('+');
        Polynomial acc = parse_term();
        if (neg) acc = -acc;
        while (true) {
            char c = peek();
            if (c == '+') {
                ++pos_;
                acc += parse_term();
            } else if (c == '-') {
                ++pos_;
                acc -= parse_term();
            } else {
                break;
            }
        }
        return acc;
    }

    Polynomial parse_term() {
        Polynomial acc = parse_factor();
        while (eat('*')) acc = acc * parse_factor();
        return acc;
    }

    Polynomial parse_factor() {
        Polynomial base = parse_base();
        skip_ws();
        if (eat('^')) {
            skip_ws();
            size_t start = pos_;
            if (pos_ < text_.size() && text_[pos_] == '-')
                throw ParseError("negative exponent", pos_);
            unsigned long k = parse_uint();
            if (start == pos_) throw ParseError("expected exponent", pos_);
            return base.pow(static_cast<unsigned>(k));
        }
        return base;
    }

    Polynomial parse_base() {
        skip_ws();
        if (pos_ >= text_.size()) throw ParseError("unexpected end of input", pos_);
        char c = text_[pos_];
        if (c == '(') {
            ++pos_;
            Polynomial inner = parse_expr();
            if (!eat(')')) throw ParseError("expected ')'", pos_);
            return inner;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return parse_identifier();
        throw ParseError(std::string("unexpected character '") + c + "'", pos_);
    }

    unsigned long parse_uint() {
        size_t start = pos_;
        while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
        if (pos_ == start) throw ParseError("expected unsigned integer", pos_);
        return std::stoul(text_.substr(start, pos_ - start));
    }

    Polynomial parse_number() {
        size_t start = pos_;
        bool saw_dot = false;
        while (pos_ < text_.size()) {
            char c = text_[pos_];
            if (std::isdigit(static_cast<unsigned char>(c))) {
                ++pos_;
            } else if (c == '.' && !saw_dot) {
                saw_dot = true;
                ++pos_;
            } else {
                break;
            }
        }
        std::string digits = text_.substr(start, pos_ - start);
        if (digits == ".") throw ParseError("malformed number", start);
        Rat value;
        if (!saw_dot && eat('/')) {
            size_t dstart = pos_;
            unsigned long den = parse_uint();
            if (den == 0) throw ParseError("zero denominator", dstart);
            value = Rat(bigint_from_decimal(digits), BigInt(den));
        } else {
            value = rat_from_string(digits);
        }
        return Polynomial::constant(n(), value);
    }

    Polynomial parse_identifier() {
        size_t start = pos_;
        while (pos_ < text_.size() &&
               (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
            ++pos_;
        std::string name = text_.substr(start, pos_ - start);
        for (size_t i = 0; i < vars_.size(); ++i)
            if (vars_[i] == name) return Polynomial::variable(n(), static_cast<int>(i));
        throw ParseError("unknown identifier '" + name + "'", start);
    }

    const std::string& text_;
    std::vector<std::string> vars_;
    size_t pos_ = 0;
};

inline Polynomial parse_polynomial(const std::string& text, const std::vector<std::string>& vars) {
    return PolynomialParser(text, vars).parse();
}

}  // namespace momentbound
