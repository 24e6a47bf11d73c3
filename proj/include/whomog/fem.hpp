#ifndef WHOMOG_FEM_HPP
#define WHOMOG_FEM_HPP

#include <whomog/geometry.hpp>
#include <whomog/tiling.hpp>

#include <functional>

namespace whomog {

enum class Side : int { One = 1, Two = 2 };

using TensorField = std::function<Mat2(const Vec2&)>;
using ScalarField = std::function<double(const Vec2&)>;

/*! Bulk tensors D^j on Y_j and tangential surface diffusivities on Gamma.
//  In 2D the tangent space of Gamma is one-dimensional, so the surface
//  tensor restricted to T_y Gamma is the scalar tau^T D_Gamma tau; users
//  supply that scalar directly. c0 is the declared coercivity constant. */
struct DiffusionSpec {
    TensorField D1, D2;
    ScalarField DG1, DG2;
    double c0 = 1.0;

    const TensorField& bulk(Side s) const { return s == Side::One ? D1 : D2; }
    const ScalarField& surface(Side s) const { return s == Side::One ? DG1 : DG2; }
};

/*! Bulk reactions f^j(t,y,z) and surface reactions h^j(t,y,z1,z2),
//  Y-periodic in y, uniformly Lipschitz in the state variables with the
//  declared constant. */
struct ReactionSpec {
    std::function<double(double, const Vec2&, double)> f1, f2;
    std::function<double(double, const Vec2&, double, double)> h1, h2;
    double lipschitz = 0.0;
    double sup_bound = 0.0;
    bool f_depends_on_y = false;
    bool h_depends_on_y = false;
};

// --- P1 element kernels ---------------------------------------------------
// Triplet-emitting versions optionally renumber vertices through `map`
// (nullptr = identity). Coefficients are evaluated at the mesh's coefficient
// points (unit-cell coordinates on tilings, physical centroids otherwise).

void add_bulk_mass(const TriangleMesh& mesh, double scale, const std::vector<int>* map,
                   std::vector<Triplet>& out);
void add_bulk_stiffness(const TriangleMesh& mesh, const TensorField& D, double scale,
                        const std::vector<int>* map, std::vector<Triplet>& out);
void add_surface_mass(const SurfaceMesh& smesh, double scale, const std::vector<int>* map,
                      std::vector<Triplet>& out);
void add_surface_stiffness(const SurfaceMesh& smesh, const ScalarField& DG, double scale,
                           const std::vector<int>* map, std::vector<Triplet>& out);

SpMat build_operator(int dim, std::vector<Triplet>& triplets);

SpMat assemble_bulk_stiffness(const TriangleMesh& mesh, const TensorField& D, double scale = 1.0);
SpMat assemble_bulk_stiffness(const TriangleMesh& mesh, Side side, const DiffusionSpec& D,
                              double scale = 1.0);
SpMat assemble_surface_stiffness(const SurfaceMesh& smesh, const ScalarField& DG, double scale = 1.0);
SpMat assemble_mass(const TriangleMesh& mesh, double scale = 1.0);
SpMat assemble_mass(const SurfaceMesh& smesh, double scale = 1.0);

// Surface operators over all tiles of Gamma_eps, lifted into the bulk
// numbering of side j (physical metric; no eps weight applied).
SpMat assemble_tiled_surface_mass(const EpsilonTiling& tl, Side side);
SpMat assemble_tiled_surface_stiffness(const EpsilonTiling& tl, Side side, const ScalarField& DG);

// --- linear solves ---------------------------------------------------------

struct SolveOptions {
    double tol = 1e-10;
    int max_iterations = 10000;
};

struct SolveReport {
    int iterations = 0;
    double residual = 0.0;
};

// Diagonally preconditioned CG for SPD systems; throws SolverDivergence.
VecX cg_solve(const SpMat& A, const VecX& b, const SolveOptions& opt = {},
              SolveReport* report = nullptr, const VecX* guess = nullptr);

// --- periodic reduction -----------------------------------------------------

/*! Master/slave identification resolved to canonical representatives, as a
//  boolean prolongation P (n_full x n_reduced). An optional pin removes one
//  representative to fix the constant nullspace. */
struct PeriodicReduction {
    SpMat P;
    std::vector<int> rep;        // vertex -> representative vertex
    std::vector<int> reduced_id; // vertex -> reduced index, -1 if pinned
    int pinned_vertex = -1;

    VecX restrict_rhs(const VecX& b) const { return SpMat(P.transpose()) * b; }
    SpMat reduce(const SpMat& A) const {
        return SpMat(SpMat(P.transpose()) * SpMat(A * P));
    }
    VecX expand(const VecX& reduced) const { return P * reduced; }
};

PeriodicReduction build_periodic_reduction(const TriangleMesh& mesh, int pin_vertex = -1);

/*! DOF bookkeeping of the trace-coupled pair per the space H_{j,eps}:
//  interface unknowns are restrictions of bulk unknowns on each side, with
//  the side-1 and side-2 traces distinct at the same geometric node. */
struct CoupledDofMap {
    int n_bulk1 = 0, n_bulk2 = 0;
    std::vector<int> trace1, trace2; // surface node -> bulk vertex per side
    PeriodicReduction reduction;     // side-1 reduction (cell problems only)
};

CoupledDofMap build_coupled_dof_map(const UnitCell& cell, bool with_periodic_reduction,
                                    int pin_vertex = 0);

// --- discrete eps-weighted norms --------------------------------------------

/*! Unit-coefficient quadratic forms realizing the H_{j,eps} and L_{j,eps}
//  inner products in the bulk numbering of one side. Surface parts are
//  lifted trace forms in the physical (micro) metric; the eps weight is
//  applied at evaluation time. */
struct HjeForm {
    SpMat Mb, Kb;           // bulk mass / stiffness (identity coefficients)
    SpMat Ms, Ks;           // lifted surface mass / stiffness
    std::vector<int> trace; // concatenated surface->bulk map (consistency checks)
};

HjeForm build_hje_form(const SideMesh& side, const SurfaceMesh& surf);
HjeForm build_hje_form(const EpsilonTiling& tl, Side side);

double hje_norm(const HjeForm& form, const VecX& bulk, const VecX& trace_values, double epsilon);
double hje_norm(const HjeForm& form, const VecX& bulk, double epsilon);
double lje_norm(const HjeForm& form, const VecX& bulk, double epsilon);

// --- trace inequality diagnostic ---------------------------------------------

struct TraceCheckReport {
    double lhs = 0;       // ||u||_{L2(Gamma_eps)}
    double rhs = 0;       // C(theta) eps^{-1/2} ||u||_{L2} + theta eps^{1/2} ||grad u||_{L2}
    double ratio = 0;     // lhs / rhs
    bool violated = false;
    double c_theta = 0;
    double theta = 0;
};

// Empirical C(theta) for one mesh family: 1.1 x the largest constant needed
// by `samples` random P1 fields.
double calibrate_trace_constant(const HjeForm& form, double epsilon, double theta, int samples,
                                Rng& rng);
TraceCheckReport trace_inequality_check(const HjeForm& form, const VecX& u, double epsilon,
                                        double theta, double c_theta);

// --- assumption checks --------------------------------------------------------

struct LipschitzReport {
    double observed_f = 0, observed_h = 0;
    double declared = 0;
    bool ok = true;
};

// Randomized sampling of the reaction Lipschitz bounds against the declared constant.
LipschitzReport check_lipschitz(const ReactionSpec& R, const UnitCell& cell, int samples, Rng& rng);

// Spot-checks the diffusion data: symmetry, bulk coercivity, DG >= c0 on sampled points.
// Throws ValidationError on violation, EvaluationError on non-finite entries.
void check_diffusion_assumptions(const DiffusionSpec& D, const UnitCell& cell);

} // namespace whomog

#endif
