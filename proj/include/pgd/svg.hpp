#ifndef PGD_SVG_HPP
#define PGD_SVG_HPP

#include <string>
#include <vector>

#include "pgd/csv.hpp"

namespace pgd {
namespace svg {

// Minimal line-chart emitter. Charts are always rendered from an
// already-written CSV so the plotted numbers cannot drift from the recorded
// ones. Rows whose cells fail to parse (footers, blanks) are skipped, as are
// non-positive values on log-scaled axes.
struct ChartSpec {
    std::string title;
    std::string x_column;
    std::vector<std::string> y_columns;
    bool log_x = false;
    bool log_y = false;
};

std::string render(const csv::Data& data, const ChartSpec& spec);
void render_file(const std::string& csv_path, const ChartSpec& spec,
                 const std::string& svg_path);

} // namespace svg
} // namespace pgd

#endif
