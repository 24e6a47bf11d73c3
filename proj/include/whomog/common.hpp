#ifndef WHOMOG_COMMON_HPP
#define WHOMOG_COMMON_HPP

#include <Eigen/Core>
#include <Eigen/Sparse>

#include <random>
#include <stdexcept>
#include <string>

namespace whomog {

using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;
using VecX = Eigen::VectorXd;

// Row-major so the internal layout is plain CSR (row offsets, column
// indices, values).
using SpMat = Eigen::SparseMatrix<double, Eigen::RowMajor>;
using Triplet = Eigen::Triplet<double>;

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct MeshGenerationFailure : Error { using Error::Error; };
struct TopologyError : Error { using Error::Error; };
struct GeometryError : Error { using Error::Error; };
struct EvaluationError : Error { using Error::Error; };
struct ConsistencyError : Error { using Error::Error; };
struct SolverDivergence : Error { using Error::Error; };
struct SingularSystem : Error { using Error::Error; };
struct CertificateFailure : Error { using Error::Error; };
struct DomainMismatch : Error { using Error::Error; };
struct ParseError : Error { using Error::Error; };
struct ValidationError : Error { using Error::Error; };
struct IoError : Error { using Error::Error; };

using Rng = std::mt19937_64;

inline VecX random_nodal_field(int n, Rng& rng) {
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    VecX v(n);
    for (int i = 0; i < n; ++i) v[i] = dist(rng);
    return v;
}

} // namespace whomog

#endif
