#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "fhlse/errors.hpp"
#include "fhlse/field.hpp"

namespace fhlse {

namespace {

constexpr std::string_view kMetadataHeader = "rows,cols,cell_km,gamma,sigma";

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split(std::string_view line) {
    std::vector<std::string_view> cells;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        cells.push_back(trim(line.substr(start, comma - start)));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return cells;
}

// Rows and columns are reported 1-based, as a spreadsheet would show them.
double parse_number(std::string_view cell, std::size_t row, std::size_t col) {
    double value = 0.0;
    const auto [end, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
    if (cell.empty() || ec != std::errc{} || end != cell.data() + cell.size()) {
        throw ParseError(fmt::format("non-numeric cell '{}'", cell), row, col);
    }
    return value;
}

std::size_t parse_count(std::string_view cell, std::size_t row, std::size_t col) {
    std::size_t value = 0;
    const auto [end, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
    if (cell.empty() || ec != std::errc{} || end != cell.data() + cell.size()) {
        throw ParseError(fmt::format("expected a positive integer, got '{}'", cell), row, col);
    }
    return value;
}

}  // namespace

GridField read_grid_field(std::istream& in) {
    std::string line;
    std::size_t line_no = 0;
    auto next_line = [&]() -> bool {
        while (std::getline(in, line)) {
            ++line_no;
            if (!trim(line).empty()) return true;
        }
        return false;
    };

    if (!next_line()) throw ParseError("missing metadata line", 1, 1);
    if (trim(line) == kMetadataHeader && !next_line()) {
        throw ParseError("missing metadata values", line_no + 1, 1);
    }
    const auto meta = split(line);
    if (meta.size() != 5) {
        throw ParseError(fmt::format("metadata needs 5 fields ({}), got {}", kMetadataHeader,
                                     meta.size()),
                         line_no, std::min<std::size_t>(meta.size(), 5) + 1);
    }
    GridField field;
    field.dims.rows = parse_count(meta[0], line_no, 1);
    field.dims.cols = parse_count(meta[1], line_no, 2);
    field.cell_km = parse_number(meta[2], line_no, 3);
    field.gamma = parse_number(meta[3], line_no, 4);
    field.sigma = parse_number(meta[4], line_no, 5);
    if (field.dims.rows < 2 || field.dims.cols < 2) {
        throw ParseError("grid must be at least 2x2", line_no, 1);
    }
    if (!(field.cell_km > 0.0)) throw ParseError("cell size must be positive", line_no, 3);
    if (!(field.sigma >= 0.0)) throw ParseError("sigma must be non-negative", line_no, 5);

    field.values.reserve(field.dims.cells());
    for (std::size_t r = 0; r < field.dims.rows; ++r) {
        if (!next_line()) {
            throw ParseError(fmt::format("expected {} data rows, found {}", field.dims.rows, r),
                             line_no + 1, 1);
        }
        const auto cells = split(line);
        if (cells.size() != field.dims.cols) {
            throw ParseError(fmt::format("ragged row: {} values, expected {}", cells.size(),
                                         field.dims.cols),
                             line_no, std::min(cells.size(), field.dims.cols) + 1);
        }
        for (std::size_t c = 0; c < cells.size(); ++c) {
            field.values.push_back(parse_number(cells[c], line_no, c + 1));
        }
    }
    if (next_line()) {
        throw ParseError(fmt::format("unexpected data after {} rows", field.dims.rows), line_no, 1);
    }
    return field;
}

GridField load_grid_field(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error(fmt::format("cannot open grid file '{}'", path.string()));
    return read_grid_field(in);
}

void write_grid_field(std::ostream& out, const GridField& field) {
    field.validate();
    fmt::print(out, "{},{},{:.17g},{:.17g},{:.17g}\n", field.dims.rows, field.dims.cols,
               field.cell_km, field.gamma, field.sigma);
    for (std::size_t r = 0; r < field.dims.rows; ++r) {
        for (std::size_t c = 0; c < field.dims.cols; ++c) {
            fmt::print(out, "{}{:.17g}", c == 0 ? "" : ",", field.at(r, c));
        }
        out << '\n';
    }
}

void save_grid_field(const std::filesystem::path& path, const GridField& field) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error(fmt::format("cannot write grid file '{}'", path.string()));
    write_grid_field(out, field);
    if (!out) throw std::runtime_error(fmt::format("write failed for '{}'", path.string()));
}

}  // namespace fhlse
