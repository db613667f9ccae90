#include "mineco/csv.hpp"

#include <charconv>
#include <sstream>

namespace mineco {

std::string format_number(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

CsvWriter::CsvWriter(const std::string& path, std::vector<std::string> header)
    : out_(path), columns_(header.size()) {
    if (!out_) throw Error("cannot open '" + path + "' for writing");
    for (std::size_t i = 0; i < header.size(); ++i) out_ << (i ? "," : "") << header[i];
    out_ << '\n';
}

void CsvWriter::row(const std::vector<double>& values) {
    if (values.size() != columns_) throw ShapeError("CSV row has the wrong number of columns");
    for (std::size_t i = 0; i < values.size(); ++i) out_ << (i ? "," : "") << format_number(values[i]);
    out_ << '\n';
}

namespace {

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream s(line);
    while (std::getline(s, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
}

}  // namespace

CsvDocument read_csv(const std::string& path, const std::vector<std::string>& expected_header) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open '" + path + "'");
    CsvDocument doc;
    std::string line;
    std::size_t offset = 0;
    if (!std::getline(in, line)) throw ParseError("empty CSV '" + path + "'", 0);
    doc.header = split(line);
    if (!expected_header.empty() && doc.header != expected_header)
        throw ParseError("unexpected CSV header in '" + path + "'", 0);
    offset += line.size() + 1;
    while (std::getline(in, line)) {
        if (line.empty()) {
            offset += 1;
            continue;
        }
        auto cells = split(line);
        if (cells.size() != doc.header.size()) throw ParseError("wrong column count in '" + path + "'", offset);
        std::vector<double> values;
        values.reserve(cells.size());
        for (const auto& c : cells) {
            try {
                std::size_t used = 0;
                double v = std::stod(c, &used);
                if (used != c.size()) throw std::invalid_argument(c);
                values.push_back(v);
            } catch (const std::exception&) {
                throw ParseError("non-numeric cell '" + c + "' in '" + path + "'", offset);
            }
        }
        doc.rows.push_back(std::move(values));
        offset += line.size() + 1;
    }
    return doc;
}

}  // namespace mineco
