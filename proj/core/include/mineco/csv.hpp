#pragma once

// Numeric CSV files. Every column written by the tools is numeric; booleans
// are 0/1. Doubles use %.17g so a read-back reproduces them bit-exactly.

#include <cstdio>
#include <fstream>
#include <string>
#include <type_traits>
#include <vector>

#include "mineco/errors.hpp"

namespace mineco {

std::string format_number(double v);

class CsvWriter {
public:
    CsvWriter(const std::string& path, std::vector<std::string> header);

    template <typename... Ts>
    void row(const Ts&... values) {
        if (sizeof...(Ts) != columns_) throw ShapeError("CSV row has the wrong number of columns");
        std::string line;
        bool first = true;
        ((line += (first ? "" : ","), line += cell(values), first = false), ...);
        out_ << line << '\n';
    }

    void row(const std::vector<double>& values);

private:
    template <typename T>
    static std::string cell(const T& v) {
        if constexpr (std::is_same_v<T, bool>) return v ? "1" : "0";
        else if constexpr (std::is_integral_v<T>) return std::to_string(v);
        else return format_number(static_cast<double>(v));
    }

    std::ofstream out_;
    std::size_t columns_;
};

struct CsvDocument {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;
};

/// Parses a numeric CSV. If `expected_header` is nonempty it must match exactly.
CsvDocument read_csv(const std::string& path, const std::vector<std::string>& expected_header = {});

}  // namespace mineco
