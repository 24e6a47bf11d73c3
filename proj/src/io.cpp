#include <whomog/io.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>

namespace whomog {

void write_field(const VecX& field, const std::string& path) {
    std::FILE* f = std::fopen(path.c_str(), "w");
    if (!f) throw IoError("cannot open for writing: " + path);
    std::fprintf(f, "fieldfmt 1\nvalues %d\n", static_cast<int>(field.size()));
    for (int i = 0; i < field.size(); ++i) std::fprintf(f, "%.17g\n", field[i]);
    std::fclose(f);
}

VecX read_field(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open for reading: " + path);
    std::string word;
    int version = 0;
    long long count = -1;
    if (!(in >> word >> version) || word != "fieldfmt" || version != 1)
        throw IoError("bad field header in " + path);
    if (!(in >> word >> count) || word != "values" || count < 0)
        throw IoError("bad or missing values section in " + path);
    VecX v(count);
    for (long long i = 0; i < count; ++i) {
        if (!(in >> v[i])) throw IoError("truncated field file " + path);
        if (!std::isfinite(v[i])) throw IoError("non-finite value in " + path);
    }
    return v;
}

namespace {

void write_table(const std::string& path, const std::vector<std::string>& header,
                 const std::vector<std::vector<double>>& rows, const char* head_prefix,
                 char sep) {
    std::FILE* f = std::fopen(path.c_str(), "w");
    if (!f) throw IoError("cannot open for writing: " + path);
    std::fputs(head_prefix, f);
    for (std::size_t i = 0; i < header.size(); ++i)
        std::fprintf(f, "%s%s", i ? std::string(1, sep).c_str() : "", header[i].c_str());
    std::fputc('\n', f);
    for (const auto& row : rows) {
        if (row.size() != header.size()) {
            std::fclose(f);
            throw IoError("row width does not match header in " + path);
        }
        for (std::size_t i = 0; i < row.size(); ++i)
            std::fprintf(f, "%s%.17g", i ? std::string(1, sep).c_str() : "", row[i]);
        std::fputc('\n', f);
    }
    std::fclose(f);
}

} // namespace

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows) {
    write_table(path, header, rows, "", ',');
}

void write_dat(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows) {
    write_table(path, header, rows, "# ", ' ');
}

void dump_operator(const SpMat& A, const std::string& path) {
    std::FILE* f = std::fopen(path.c_str(), "w");
    if (!f) throw IoError("cannot open for writing: " + path);
    for (int k = 0; k < A.outerSize(); ++k)
        for (SpMat::InnerIterator it(A, k); it; ++it)
            std::fprintf(f, "%ld %ld %.17g\n", static_cast<long>(it.row()),
                         static_cast<long>(it.col()), it.value());
    std::fclose(f);
}

std::string format_time_label(double t) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", t);
    return buf;
}

} // namespace whomog
