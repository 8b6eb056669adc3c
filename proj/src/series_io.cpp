#include "hmmar/series_io.hpp"

#include "hmmar/errors.hpp"

#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace hmmar {

namespace {

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r\n");
    if (begin == std::string::npos) return {};
    const auto end = s.find_last_not_of(" \t\r\n");
    return s.substr(begin, end - begin + 1);
}

std::vector<std::string> split_commas(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) out.push_back(trim(cell));
    return out;
}

}  // namespace

std::string format_double(double value) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", value);
    return buf;
}

std::string series_to_csv(const std::vector<double>& y,
                          const std::optional<std::vector<std::size_t>>& z) {
    std::string out = z ? "y,z\n" : "y\n";
    for (std::size_t i = 0; i < y.size(); ++i) {
        out += format_double(y[i]);
        if (z) {
            out += ',';
            out += std::to_string((*z)[i]);
        }
        out += '\n';
    }
    return out;
}

std::vector<double> parse_series_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    std::size_t column = 0;
    bool header_seen = false;
    std::size_t line_no = 0;
    std::vector<double> out;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string t = trim(line);
        if (t.empty()) continue;
        const auto cells = split_commas(t);
        if (!header_seen) {
            header_seen = true;
            bool found = false;
            for (std::size_t i = 0; i < cells.size(); ++i) {
                if (cells[i] == "y") {
                    column = i;
                    found = true;
                }
            }
            if (!found) throw Error("series CSV header must contain a 'y' column");
            continue;
        }
        if (column >= cells.size()) {
            throw Error("series CSV line " + std::to_string(line_no) + " has too few columns");
        }
        const std::string& cell = cells[column];
        char* end = nullptr;
        errno = 0;
        const double v = std::strtod(cell.c_str(), &end);
        if (cell.empty() || end != cell.c_str() + cell.size() || errno == ERANGE) {
            throw Error("series CSV line " + std::to_string(line_no) + ": cannot parse '" + cell + "'");
        }
        out.push_back(v);
    }
    if (!header_seen) throw Error("series CSV is empty");
    return out;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path + "' for reading");
    std::ostringstream ss;
    ss << in.rdbuf();
    if (in.bad()) throw IoError("error reading '" + path + "'");
    return ss.str();
}

std::vector<double> load_series(const std::string& path) { return parse_series_csv(read_file(path)); }

void atomic_write_file(const std::string& path, const std::string& contents) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot open '" + tmp + "' for writing");
        out << contents;
        out.flush();
        if (!out) {
            std::error_code ec;
            std::filesystem::remove(tmp, ec);
            throw IoError("error writing '" + tmp + "'");
        }
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp, ec);
        throw IoError("cannot rename '" + tmp + "' to '" + path + "'");
    }
}

}  // namespace hmmar
