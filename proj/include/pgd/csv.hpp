#ifndef PGD_CSV_HPP
#define PGD_CSV_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace pgd {
namespace csv {

// Full-precision, reproducible CSV writing: doubles are rendered with %.17g,
// so identical inputs give byte-identical files.
class Writer {
public:
    Writer& comment(const std::string& text);
    Writer& header(const std::vector<std::string>& columns);
    Writer& cell(double v);
    Writer& cell(long v);
    Writer& cell(const std::string& v);
    Writer& blank_cell();
    Writer& end_row();

    const std::string& str() const { return buffer_; }
    void write(const std::string& path) const;

    static std::string format(double v);

private:
    void sep();
    std::string buffer_;
    bool row_open_ = false;
};

struct Data {
    std::vector<std::string> comments;
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;

    int column_index(const std::string& name) const; // -1 if absent
    // Numeric view of one column; rows that fail to parse yield nullopt.
    std::vector<std::optional<double>> numeric_column(const std::string& name) const;
};

Data read_file(const std::string& path);
Data read_string(const std::string& text);

} // namespace csv
} // namespace pgd

#endif
