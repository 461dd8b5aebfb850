#include "pgd/csv.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "pgd/errors.hpp"

namespace pgd {
namespace csv {

std::string Writer::format(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void Writer::sep() {
    if (row_open_) buffer_ += ',';
    row_open_ = true;
}

Writer& Writer::comment(const std::string& text) {
    buffer_ += "# " + text + "\n";
    return *this;
}

Writer& Writer::header(const std::vector<std::string>& columns) {
    for (std::size_t i = 0; i < columns.size(); ++i) {
        if (i > 0) buffer_ += ',';
        buffer_ += columns[i];
    }
    buffer_ += '\n';
    return *this;
}

Writer& Writer::cell(double v) {
    sep();
    buffer_ += format(v);
    return *this;
}

Writer& Writer::cell(long v) {
    sep();
    buffer_ += std::to_string(v);
    return *this;
}

Writer& Writer::cell(const std::string& v) {
    sep();
    buffer_ += v;
    return *this;
}

Writer& Writer::blank_cell() {
    sep();
    return *this;
}

Writer& Writer::end_row() {
    buffer_ += '\n';
    row_open_ = false;
    return *this;
}

void Writer::write(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorKind::Config, "cannot write file: " + path);
    out << buffer_;
}

int Data::column_index(const std::string& name) const {
    for (std::size_t i = 0; i < columns.size(); ++i)
        if (columns[i] == name) return static_cast<int>(i);
    return -1;
}

std::vector<std::optional<double>> Data::numeric_column(const std::string& name) const {
    const int idx = column_index(name);
    if (idx < 0) throw Error(ErrorKind::Config, "csv: no column named '" + name + "'");
    std::vector<std::optional<double>> out;
    out.reserve(rows.size());
    for (const auto& row : rows) {
        if (static_cast<std::size_t>(idx) >= row.size() || row[static_cast<std::size_t>(idx)].empty()) {
            out.push_back(std::nullopt);
            continue;
        }
        const std::string& cellv = row[static_cast<std::size_t>(idx)];
        char* end = nullptr;
        const double v = std::strtod(cellv.c_str(), &end);
        if (end == nullptr || *end != '\0')
            out.push_back(std::nullopt);
        else
            out.push_back(v);
    }
    return out;
}

Data read_string(const std::string& text) {
    Data data;
    std::istringstream in(text);
    std::string line;
    bool have_header = false;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line[0] == '#') {
            std::string c = line.substr(1);
            if (!c.empty() && c[0] == ' ') c.erase(0, 1);
            data.comments.push_back(c);
            continue;
        }
        std::vector<std::string> cells;
        std::string cur;
        for (const char ch : line) {
            if (ch == ',') {
                cells.push_back(cur);
                cur.clear();
            } else {
                cur.push_back(ch);
            }
        }
        cells.push_back(cur);
        if (!have_header) {
            data.columns = std::move(cells);
            have_header = true;
        } else {
            data.rows.push_back(std::move(cells));
        }
    }
    return data;
}

Data read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::Config, "cannot open file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return read_string(ss.str());
}

} // namespace csv
} // namespace pgd
