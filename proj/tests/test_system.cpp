#include "mfhp/driver.hpp"
#include "mfhp/system.hpp"
#include "oracle.hpp"

#include <doctest.h>

#include <sstream>

using namespace mfhp;

namespace {

using RowMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

SparseSystem identity_system(Index n) {
    SparseSystem s;
    s.matrix.resize(n, n);
    s.matrix.setIdentity();
    s.rhs = Eigen::VectorXd::LinSpaced(n, 1.0, 2.0);
    return s;
}

WeightSet weights_for(const ProblemSpec& pb, const NodeSet& n) {
    OperatorTableOptions o;
    o.skip_dirichlet = true;
    return build_operator_table(n, pb.operators(), o);
}

// Poisson problem with u = x + y: mixed Dirichlet / Neumann on the unit disc.
ProblemSpec linear_poisson() {
    ProblemSpec pb;
    pb.name = "linear";
    pb.classify = [](const Point& p, const Point&, int) {
        return p.x() <= 0.5 ? NodeType::Neumann : NodeType::Dirichlet;
    };
    pb.source = [](const Point&) { return Point::Zero().eval(); };
    pb.exact = [](const Point& p) { return Point(p.x() + p.y(), 0, 0); };
    pb.dirichlet = pb.exact;
    pb.flux = [](const Point&, const Point& n) { return Point(n.x() + n.y(), 0, 0); };
    return pb;
}

// Elasticity with the linear displacement u = G x (constant stress), which
// every discrete operator of order >= 1 must reproduce.
ProblemSpec linear_elastic(int d, const Eigen::Matrix3d& G, bool with_symmetry) {
    const double lam = 1.3, mu = 0.7;
    ProblemSpec pb;
    pb.name = "linear-elastic";
    pb.pde = PdeKind::NavierCauchy;
    pb.components = d;
    pb.lame_lambda = lam;
    pb.lame_mu = mu;
    pb.shape = d == 2 ? DomainShape::box(Point::Zero(), Point(1, 1, 0), 2)
                      : DomainShape::box(Point::Zero(), Point::Ones(), 3);
    pb.classify = [with_symmetry](const Point&, const Point&, int face) {
        if (face == 0) return NodeType::Dirichlet;
        if (face == 2 && with_symmetry) return NodeType::Symmetry;
        return NodeType::Traction;
    };
    Eigen::Matrix3d eps = 0.5 * (G + G.transpose());
    Eigen::Matrix3d sigma = lam * eps.trace() * Eigen::Matrix3d::Identity() + 2 * mu * eps;
    pb.source = [](const Point&) { return Point::Zero().eval(); };
    pb.exact = [G](const Point& p) { return (G * p).eval(); };
    pb.dirichlet = pb.exact;
    pb.flux = [sigma](const Point&, const Point& n) { return (sigma * n).eval(); };
    return pb;
}

double max_abs_error(const std::vector<double>& u, const std::vector<double>& e) {
    double m = 0;
    for (std::size_t i = 0; i < u.size(); ++i) m = std::max(m, std::abs(u[i] - e[i]));
    return m;
}

}  // namespace

TEST_SUITE("system") {

TEST_CASE("identity system is solved immediately") {
    for (Index n : {10, 2500}) {
        const SparseSystem s = identity_system(n);
        const SolveResult r = solve(s, {});
        CHECK(r.iterations <= 1);
        CHECK(r.direct == (n < 2000));
        CHECK((r.solution - s.rhs).norm() <= 1e-14 * s.rhs.norm());
    }
}

TEST_CASE("exact discrete solution as guess needs at most one iteration") {
    const ProblemSpec pb = peak_problem();
    const NodeSet n = pb.discretise(SpacingField::constant(0.03), 1, 1000000);
    const SparseSystem s = assemble(pb, n, weights_for(pb, n));
    REQUIRE(s.unknowns() >= 2000);
    const SolveResult cold = solve(s, {});
    const SolveResult warm = solve(s, {}, cold.solution);
    CHECK(warm.iterations <= 1);
    CHECK(warm.iterations <= cold.iterations);
    CHECK(warm.residual <= cold.residual * (1 + 1e-12) + 1e-15);
}

TEST_CASE("linear manufactured solution is reproduced") {
    const ProblemSpec pb = linear_poisson();
    for (double h : {0.1, 0.03}) {
        const NodeSet n = pb.discretise(SpacingField::constant(h), 2, 1000000);
        const SingleSolve r = solve_on_nodes(pb, n);
        CHECK(max_abs_error(r.solution, exact_values(pb, n)) <= 1e-8);
    }
}

TEST_CASE("linear elastic fields are reproduced with traction and symmetry rows") {
    Eigen::Matrix3d G2 = Eigen::Matrix3d::Zero();
    G2(0, 0) = 0.3;
    G2(1, 1) = -0.2;  // u_y = 0 on y = 0 and no shear there: compatible with symmetry
    const ProblemSpec p2 = linear_elastic(2, G2, true);
    const NodeSet n2 = p2.discretise(SpacingField::constant(0.05), 1, 1000000);
    CHECK(max_abs_error(solve_on_nodes(p2, n2).solution, exact_values(p2, n2)) <= 1e-8);

    Eigen::Matrix3d G3;
    G3 << 0.3, 0.1, -0.2, 0.05, -0.1, 0.2, 0.15, 0.0, 0.25;
    const ProblemSpec p3 = linear_elastic(3, G3, false);
    const NodeSet n3 = p3.discretise(SpacingField::constant(0.15), 1, 1000000);
    CHECK(max_abs_error(solve_on_nodes(p3, n3).solution, exact_values(p3, n3)) <= 1e-8);
}

TEST_CASE("row structure") {
    const ProblemSpec pb = peak_problem();
    NodeSet n = pb.discretise(SpacingField::constant(0.1), 1, 1000000);
    for (std::size_t i = 0; i < n.size(); ++i) n.m[i] = i % 3 ? 2 : 4;
    const SparseSystem s = assemble(pb, n, weights_for(pb, n));
    CHECK(s.unknowns() == static_cast<Index>(n.size()));
    for (std::size_t i = 0; i < n.size(); ++i) {
        const Index row = static_cast<Index>(i);
        std::vector<std::pair<Index, double>> entries;
        for (RowMatrix::InnerIterator it(s.matrix, row); it; ++it) entries.emplace_back(it.col(), it.value());
        if (n.type[i] == NodeType::Dirichlet) {
            REQUIRE(entries.size() == 1);
            CHECK(entries[0].first == row);
            CHECK(entries[0].second == 1.0);
            CHECK(s.rhs[row] == peak_value({}, n.pos[i], 2));
        } else if (n.type[i] == NodeType::Interior) {
            CHECK(entries.size() == static_cast<std::size_t>(stencil_size(n.m[i], 2)));
        }
    }
}

TEST_CASE("Navier-Cauchy systems are 2N and couple both components") {
    const ProblemSpec pb = fretting_spec();
    const NodeSet n = pb.discretise(SpacingField::constant(5e-4), 1, 1000000);
    const SparseSystem s = assemble(pb, n, weights_for(pb, n));
    CHECK(s.unknowns() == 2 * static_cast<Index>(n.size()));
    CHECK(s.matrix.rows() == s.matrix.cols());
    for (std::size_t i = 0; i < n.size(); ++i) {
        if (n.type[i] != NodeType::Interior) continue;
        for (int c = 0; c < 2; ++c) {
            bool even = false, odd = false;
            for (RowMatrix::InnerIterator it(s.matrix, 2 * static_cast<Index>(i) + c); it; ++it)
                (it.col() % 2 ? odd : even) = true;
            CHECK(even);
            CHECK(odd);
        }
    }
    // symmetry nodes impose u_y = 0 exactly
    for (std::size_t i = 0; i < n.size(); ++i) {
        if (n.type[i] != NodeType::Symmetry) continue;
        const auto eqs = node_equations(pb, n, weights_for(pb, n), i);
        CHECK(eqs[1].imposed);
        REQUIRE(eqs[1].terms.size() == 1);
        CHECK(eqs[1].terms[0].first == 2 * static_cast<Index>(i) + 1);
        CHECK(eqs[1].rhs == 0.0);
        break;
    }
}

TEST_CASE("reported residual matches an independent recomputation") {
    for (double h : {0.1, 0.03}) {
        const ProblemSpec pb = peak_problem();
        const NodeSet n = pb.discretise(SpacingField::constant(h), 1, 1000000);
        const SparseSystem s = assemble(pb, n, weights_for(pb, n));
        const SolveResult r = solve(s, {});
        const double independent = (s.rhs - s.matrix * r.solution).norm() / s.rhs.norm();
        CHECK(std::abs(r.residual - independent) <= 1e-12);
        CHECK(r.converged);
    }
}

TEST_CASE("doubling the data doubles the right-hand side exactly") {
    const ProblemSpec pb = peak_problem();
    ProblemSpec twice = pb;
    twice.source = [f = pb.source](const Point& p) { return (2.0 * f(p)).eval(); };
    twice.dirichlet = [g = pb.dirichlet](const Point& p) { return (2.0 * g(p)).eval(); };
    twice.flux = [q = pb.flux](const Point& p, const Point& nn) { return (2.0 * q(p, nn)).eval(); };
    const NodeSet n = pb.discretise(SpacingField::constant(0.05), 1, 1000000);
    const WeightSet w = weights_for(pb, n);
    const SparseSystem a = assemble(pb, n, w), b = assemble(twice, n, w);
    CHECK(b.rhs == 2.0 * a.rhs);
    CHECK((b.matrix - a.matrix).norm() == 0.0);
}

TEST_CASE("missing weights raise assembly incomplete") {
    const ProblemSpec pb = peak_problem();
    const NodeSet n = pb.discretise(SpacingField::constant(0.1), 1, 1000000);
    const WeightSet grads = build_operator_table(n, {Operator::d(0), Operator::d(1)});
    CHECK_THROWS_AS(assemble(pb, n, grads), AssemblyIncomplete);
    CHECK_THROWS_AS(assemble(pb, n, WeightSet{}), AssemblyIncomplete);
}

TEST_CASE("solver failures carry the residual history") {
    SparseSystem s;
    const Index n = 2500;
    s.matrix.resize(n, n);
    std::vector<Eigen::Triplet<double, Index>> t;
    for (Index i = 0; i < n; ++i) t.emplace_back(i, (i + 1) % n, 0.0);  // structurally singular
    t.emplace_back(0, 0, 1.0);
    s.matrix.setFromTriplets(t.begin(), t.end());
    s.rhs = Eigen::VectorXd::Ones(n);
    try {
        solve(s, {});
        FAIL("expected a solver failure");
    } catch (const SolverFailure& e) {
        CHECK(std::string(e.what()).rfind("system:", 0) == 0);
    }
    CHECK_THROWS_AS(solve(identity_system(5), {}, Eigen::VectorXd::Zero(4)), Error);
}

TEST_CASE("matrix dump lists every stored entry") {
    const SparseSystem s = identity_system(7);
    std::stringstream out;
    write_matrix(out, s);
    int lines = 0;
    Index r = 0, c = 0;
    double v = 0;
    while (out >> r >> c >> v) {
        CHECK(r == c);
        CHECK(v == 1.0);
        ++lines;
    }
    CHECK(lines == 7);
}

}
