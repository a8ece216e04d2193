#ifndef POLYCYCLIC_CORE_SYMBOLS_HPP
#define POLYCYCLIC_CORE_SYMBOLS_HPP

#include <cstddef>
#include <mutex>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace polycyclic
{

// Maximum number of distinct indeterminates a polynomial can carry.
inline constexpr std::size_t kMaxVars = 24;

// Process-wide registry mapping indeterminate names ("mu1", "nu2", "lambda1", ...) to
// slots of the packed exponent vector. Slots are handed out on first use and never reused.
class SymbolTable
{
public:
    static SymbolTable& instance()
    {
        static SymbolTable table;
        return table;
    }

    int index(std::string_view name)
    {
        std::lock_guard<std::mutex> lock(m_mutex);
        for (std::size_t i = 0; i < m_names.size(); ++i) {
            if (m_names[i] == name) {
                return static_cast<int>(i);
            }
        }
        if (m_names.size() >= kMaxVars) {
            throw std::length_error("symbol table full; cannot register '" + std::string(name) + "'");
        }
        m_names.emplace_back(name);
        return static_cast<int>(m_names.size() - 1);
    }

    std::string name(int idx) const
    {
        std::lock_guard<std::mutex> lock(m_mutex);
        if (idx < 0 || static_cast<std::size_t>(idx) >= m_names.size()) {
            return "v" + std::to_string(idx);
        }
        return m_names[static_cast<std::size_t>(idx)];
    }

private:
    SymbolTable() = default;
    mutable std::mutex m_mutex;
    std::vector<std::string> m_names;
};

inline int symbol(std::string_view name)
{
    return SymbolTable::instance().index(name);
}

inline std::string symbol_name(int idx)
{
    return SymbolTable::instance().name(idx);
}

// Conventional names used across the library.
inline int mu_symbol(int j)
{
    return symbol("mu" + std::to_string(j));
}

inline int nu_symbol(int j)
{
    return symbol("nu" + std::to_string(j));
}

inline int lambda_symbol(int j)
{
    return symbol("lambda" + std::to_string(j));
}

// Formal transcendental constant standing for log(x0) on a transversal {x = x0}.
inline int log_transversal_symbol()
{
    return symbol("L");
}

} // namespace polycyclic

#endif // POLYCYCLIC_CORE_SYMBOLS_HPP
