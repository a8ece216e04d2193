#ifndef POLYCYCLIC_CORE_POLY_PARSE_HPP
#define POLYCYCLIC_CORE_POLY_PARSE_HPP

#include "polycyclic/core/ratfun.hpp"

#include <cctype>
#include <functional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace polycyclic
{

// Recursive-descent reader for expressions such as "3/7*a1^2*a2 - (mu1+1)/mu1".
// Grammar: expr := term (('+'|'-') term)*; term := factor (('*'|'/') factor)*;
//          factor := ('-'|'+') factor | atom ('^' integer)?; atom := number | name | '(' expr ')'.
class ExprParser
{
public:
    using Resolver = std::function<int(std::string_view)>;

    explicit ExprParser(std::string_view text, Resolver resolve = [](std::string_view n) { return symbol(n); })
        : m_text(text), m_resolve(std::move(resolve))
    {
    }

    RatFun parse()
    {
        RatFun r = expr();
        skip();
        if (m_pos != m_text.size()) {
            fail("unexpected trailing input");
        }
        return r;
    }

private:
    [[noreturn]] void fail(const std::string& what) const
    {
        throw std::invalid_argument(what + " at offset " + std::to_string(m_pos) + " in '" + std::string(m_text) + "'");
    }

    void skip()
    {
        while (m_pos < m_text.size() && std::isspace(static_cast<unsigned char>(m_text[m_pos]))) {
            ++m_pos;
        }
    }

    bool accept(char c)
    {
        skip();
        if (m_pos < m_text.size() && m_text[m_pos] == c) {
            ++m_pos;
            return true;
        }
        return false;
    }

    RatFun expr()
    {
        RatFun acc = term();
        while (true) {
            if (accept('+')) {
                acc += term();
            } else if (accept('-')) {
                acc -= term();
            } else {
                return acc;
            }
        }
    }

    RatFun term()
    {
        RatFun acc = factor();
        while (true) {
            if (accept('*')) {
                acc *= factor();
            } else if (accept('/')) {
                acc /= factor();
            } else {
                return acc;
            }
        }
    }

    RatFun factor()
    {
        if (accept('-')) {
            return -factor();
        }
        if (accept('+')) {
            return factor();
        }
        RatFun base = atom();
        if (accept('^')) {
            skip();
            bool neg = accept('-');
            std::size_t start = m_pos;
            while (m_pos < m_text.size() && std::isdigit(static_cast<unsigned char>(m_text[m_pos]))) {
                ++m_pos;
            }
            if (start == m_pos) {
                fail("expected integer exponent");
            }
            long k = std::stol(std::string(m_text.substr(start, m_pos - start)));
            return base.pow(neg ? -k : k);
        }
        return base;
    }

    RatFun atom()
    {
        skip();
        if (m_pos >= m_text.size()) {
            fail("unexpected end of input");
        }
        char c = m_text[m_pos];
        if (c == '(') {
            ++m_pos;
            RatFun r = expr();
            if (!accept(')')) {
                fail("expected ')'");
            }
            return r;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            std::size_t start = m_pos;
            while (m_pos < m_text.size() &&
                   (std::isdigit(static_cast<unsigned char>(m_text[m_pos])) || m_text[m_pos] == '.')) {
                ++m_pos;
            }
            if (m_pos < m_text.size() && (m_text[m_pos] == 'e' || m_text[m_pos] == 'E')) {
                std::size_t save = m_pos++;
                if (m_pos < m_text.size() && (m_text[m_pos] == '-' || m_text[m_pos] == '+')) {
                    ++m_pos;
                }
                if (m_pos < m_text.size() && std::isdigit(static_cast<unsigned char>(m_text[m_pos]))) {
                    while (m_pos < m_text.size() && std::isdigit(static_cast<unsigned char>(m_text[m_pos]))) {
                        ++m_pos;
                    }
                } else {
                    m_pos = save;
                }
            }
            return RatFun(parse_rational(m_text.substr(start, m_pos - start)));
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::size_t start = m_pos;
            while (m_pos < m_text.size() &&
                   (std::isalnum(static_cast<unsigned char>(m_text[m_pos])) || m_text[m_pos] == '_')) {
                ++m_pos;
            }
            int idx = m_resolve(m_text.substr(start, m_pos - start));
            if (idx < 0) {
                fail("unknown variable '" + std::string(m_text.substr(start, m_pos - start)) + "'");
            }
            return RatFun::var(idx);
        }
        fail(std::string("unexpected character '") + c + "'");
    }

    std::string_view m_text;
    Resolver m_resolve;
    std::size_t m_pos = 0;
};

inline RatFun parse_ratfun(std::string_view text)
{
    return ExprParser(text).parse();
}

inline Poly parse_poly(std::string_view text, ExprParser::Resolver resolve = [](std::string_view n) { return symbol(n); })
{
    RatFun r = ExprParser(text, std::move(resolve)).parse();
    if (!r.is_polynomial()) {
        throw std::invalid_argument("expression is not a polynomial: '" + std::string(text) + "'");
    }
    return r.num().scaled(Rational(1) / r.den().constant_term());
}

} // namespace polycyclic

#endif // POLYCYCLIC_CORE_POLY_PARSE_HPP
