#ifndef WHOMOG_IO_HPP
#define WHOMOG_IO_HPP

#include <whomog/common.hpp>

#include <string>
#include <vector>

namespace whomog {

// Mesh-aligned nodal field, one value per vertex line (fieldfmt 1).
// Output is byte-deterministic: %.17g, no locale.
void write_field(const VecX& field, const std::string& path);
VecX read_field(const std::string& path);

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows);

// gnuplot-friendly mirror: '#' header, space separated columns
void write_dat(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows);

// debugging dump of a sparse operator, one `i j value` triplet per line
void dump_operator(const SpMat& A, const std::string& path);

std::string format_time_label(double t);

} // namespace whomog

#endif
