#pragma once

#include <cstdio>
#include <initializer_list>
#include <ostream>
#include <string>
#include <string_view>
#include <variant>

namespace weakval {

/// Shortest round-trip-safe text for a double: 17 significant digits.
inline std::string format_real(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

/// Comma-separated, LF-terminated rows preceded by a `# schema=1` line.
class CsvWriter {
public:
    using Cell = std::variant<double, long long, std::string_view>;

    CsvWriter(std::ostream& out, std::initializer_list<std::string_view> columns) : out_(out)
    {
        out_ << "# schema=1\n";
        bool first = true;
        for (auto c : columns) {
            out_ << (first ? "" : ",") << c;
            first = false;
        }
        out_ << '\n';
    }

    void row(std::initializer_list<Cell> cells)
    {
        bool first = true;
        for (const auto& cell : cells) {
            if (!first) {
                out_ << ',';
            }
            first = false;
            if (const auto* d = std::get_if<double>(&cell)) {
                out_ << format_real(*d);
            } else if (const auto* i = std::get_if<long long>(&cell)) {
                out_ << *i;
            } else {
                out_ << std::get<std::string_view>(cell);
            }
        }
        out_ << '\n';
    }

private:
    std::ostream& out_;
};

}  // namespace weakval
