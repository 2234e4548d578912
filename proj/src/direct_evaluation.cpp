#include <Eigen/IterativeLinearSolvers>
#include <Eigen/Sparse>

#include <cmath>
#include <string>
#include <vector>

#include "hjb/errors.hpp"
#include "hjb/scheme.hpp"
#include "hjb/solvers.hpp"
#include "solver_common.hpp"

namespace hjb {

namespace {

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

struct LinearSystem {
    SparseMatrix matrix;
    Eigen::VectorXd rhs;
};

// Row i: V_i - discount * sum_j w_ij V_j = stage_i + discount * (exterior mass);
// pinned rows are identity rows holding the pinned value.
LinearSystem assemble(const Scheme& scheme, const Scheme::FrozenPolicy& frozen) {
    const auto& grid = scheme.grid();
    const auto n = static_cast<Eigen::Index>(grid.node_count());
    const int d = grid.dim();
    const double gamma = scheme.discount();
    const double exterior = scheme.spec().exterior_value;

    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(grid.node_count() + frozen.nodes.size() * (std::size_t{1} << d));
    Eigen::VectorXd rhs(n);
    for (std::size_t f = 0; f < grid.node_count(); ++f) {
        if (scheme.kind(f) == Scheme::Node::Free) continue;
        triplets.emplace_back(f, f, 1.0);
        rhs[f] = scheme.pinned_value(f);
    }
    for (std::size_t j = 0; j < frozen.nodes.size(); ++j) {
        const auto row = static_cast<Eigen::Index>(frozen.nodes[j]);
        triplets.emplace_back(row, row, 1.0);
        rhs[row] = frozen.stage[j];
        const auto w = interpolation_weights(grid, std::span<const double>(&frozen.arrivals[j * d], d));
        if (!w) {
            rhs[row] += gamma * exterior;
            continue;
        }
        for (int k = 0; k < w->count; ++k)
            triplets.emplace_back(row, static_cast<Eigen::Index>(w->index[k]), -gamma * w->weight[k]);
    }
    LinearSystem sys{SparseMatrix(n, n), std::move(rhs)};
    sys.matrix.setFromTriplets(triplets.begin(), triplets.end());
    return sys;
}

}  // namespace

EvaluationResult policy_evaluation_direct(const ProblemSpec& spec, const RegularGrid& grid,
                                          const PolicyField& policy, const ControlSet& controls,
                                          const SolverConfig& config, std::optional<ValueField> guess) {
    config.validate();
    if (!(policy.grid == grid)) throw InvalidArgument("policy lives on a different grid");
    const Scheme scheme(spec, grid, controls, config.dt);
    const auto frozen = scheme.freeze(policy.index);
    const auto sys = assemble(scheme, frozen);
    const double target = config.tolerance(grid) / 10.0;

    Eigen::VectorXd x(sys.rhs.size());
    if (guess) {
        detail::require_grid(*guess, grid, "initial guess");
        for (Eigen::Index i = 0; i < x.size(); ++i) x[i] = (*guess)[static_cast<std::size_t>(i)];
    } else {
        x = sys.rhs;
    }

    Eigen::BiCGSTAB<SparseMatrix, Eigen::DiagonalPreconditioner<double>> solver;
    solver.compute(sys.matrix);
    solver.setMaxIterations(std::max<Eigen::Index>(1000, 10 * x.size()));
    // ||r||_inf <= ||r||_2 <= tol * ||b||_2 guarantees the sup-norm target.
    const double bnorm = std::max(sys.rhs.norm(), 1e-300);
    double tol = target / bnorm;
    int iterations = 0;
    double residual = (sys.rhs - sys.matrix * x).cwiseAbs().maxCoeff();
    for (int attempt = 0; attempt < 6 && residual > target; ++attempt) {
        solver.setTolerance(tol);
        x = solver.solveWithGuess(sys.rhs, x);
        iterations += static_cast<int>(solver.iterations());
        residual = (sys.rhs - sys.matrix * x).cwiseAbs().maxCoeff();
        tol *= 0.1;
    }
    if (!(residual <= target))
        throw SolverStagnation("direct policy evaluation stalled at sup residual " + std::to_string(residual),
                               residual);
    std::vector<double> v(x.data(), x.data() + x.size());
    return {ValueField(grid, std::move(v)), iterations, true, residual};
}

}  // namespace hjb
