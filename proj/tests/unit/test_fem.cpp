#include <doctest.h>

#include <cmath>
#include <memory>
#include <numbers>
#include <random>
#include <map>
#include <set>

#include "flowplan/continuous_value.hpp"
#include "flowplan/errors.hpp"
#include "flowplan/fem.hpp"
#include "flowplan/mesh.hpp"
#include "support.hpp"

using namespace flowplan;
using namespace flowplan::testing;
using std::numbers::pi;

namespace {

const std::array<Point2, 3> kUnit{Point2{0, 0}, Point2{1, 0}, Point2{0, 1}};

std::shared_ptr<const Mesh> unit_square_mesh(int n) {
  const StateSpace st({0, 0}, 1.0 / n, n + 1, n + 1, n, 0);
  return std::make_shared<const Mesh>(build_mesh(st, 1));
}

PdeCoefficients pure_diffusion(const Mesh& m, double gamma, auto&& source) {
  PdeCoefficients c;
  c.gamma = gamma;
  c.goal_node = m.goal_node();
  c.nodes.resize(static_cast<size_t>(m.num_nodes()));
  for (int i = 0; i < m.num_nodes(); ++i) {
    auto& n = c.nodes[static_cast<size_t>(i)];
    n.sigma = Eigen::Matrix2d::Identity();
    n.reward = source(m.nodes()[static_cast<size_t>(i)]);
  }
  return c;
}

// Degree-5 seven-point rule on the reference triangle (weights sum to 1).
struct QuadPoint {
  double l1, l2, w;
};
const std::array<QuadPoint, 7> kDunavant5 = [] {
  const double a1 = 0.059715871789770, b1 = 0.470142064105115;
  const double a2 = 0.797426985353087, b2 = 0.101286507323456;
  const double w1 = 0.132394152788506, w2 = 0.125939180544827;
  return std::array<QuadPoint, 7>{QuadPoint{1.0 / 3, 1.0 / 3, 0.225},
                                  {a1, b1, w1}, {b1, a1, w1}, {b1, b1, w1},
                                  {a2, b2, w2}, {b2, a2, w2}, {b2, b2, w2}};
}();

double l2_error(const ContinuousValue& v, auto&& exact) {
  const Mesh& m = v.mesh();
  double sum = 0.0;
  for (int t = 0; t < m.num_triangles(); ++t) {
    const auto& tri = m.triangles()[static_cast<size_t>(t)];
    const Point2 &p0 = m.nodes()[static_cast<size_t>(tri[0])], &p1 = m.nodes()[static_cast<size_t>(tri[1])],
                 &p2 = m.nodes()[static_cast<size_t>(tri[2])];
    for (const auto& q : kDunavant5) {
      const double l0 = 1 - q.l1 - q.l2;
      const Point2 p{l0 * p0.x + q.l1 * p1.x + q.l2 * p2.x, l0 * p0.y + q.l1 * p1.y + q.l2 * p2.y};
      const double vh = l0 * v.coefficients()[tri[0]] + q.l1 * v.coefficients()[tri[1]] +
                        q.l2 * v.coefficients()[tri[2]];
      const double e = vh - exact(p);
      sum += q.w * m.area(t) * e * e;
    }
  }
  return std::sqrt(sum);
}

std::shared_ptr<const ContinuousValue> sampled(std::shared_ptr<const Mesh> m, auto&& f) {
  Eigen::VectorXd a(m->num_nodes());
  for (int i = 0; i < m->num_nodes(); ++i) a[i] = f(m->nodes()[static_cast<size_t>(i)]);
  return std::make_shared<const ContinuousValue>(std::move(m), std::move(a));
}

}  // namespace

TEST_CASE("reference element matrices") {
  const Eigen::Matrix3d k = p1_diffusion(kUnit, Eigen::Matrix2d::Identity());
  Eigen::Matrix3d want;
  want << 1, -0.5, -0.5, -0.5, 0.5, 0, -0.5, 0, 0.5;
  CHECK((k - want).norm() < 1e-14);

  Eigen::Matrix3d mass;
  mass << 2, 1, 1, 1, 2, 1, 1, 1, 2;
  CHECK((p1_mass(kUnit) - mass * (0.5 / 12)).norm() < 1e-15);

  // Rows of the advection block integrate mu . grad phi_j against phi_i; columns sum to zero.
  const Eigen::Matrix3d adv = p1_advection(kUnit, Eigen::Vector2d(1.0, 2.0));
  CHECK((adv.rowwise().sum()).norm() < 1e-14);
  CHECK(adv(0, 1) == doctest::Approx(1.0 / 6));
  CHECK(adv(0, 2) == doctest::Approx(2.0 / 6));
}

TEST_CASE("constants are in the kernel of the diffusion block") {
  const auto mesh = unit_square_mesh(4);
  auto c = pure_diffusion(*mesh, 1.0, [](const Point2&) { return 0.0; });
  const auto sys = assemble(*mesh, c);
  const Eigen::VectorXd ones = Eigen::VectorXd::Constant(mesh->num_nodes(), 3.5);
  CHECK((sys.K * ones).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("K is symmetric without drift") {
  const auto mesh = unit_square_mesh(6);
  auto c = pure_diffusion(*mesh, 0.95, [](const Point2& p) { return p.x; });
  for (auto& n : c.nodes) n.sigma << 2.0, 0.3, 0.3, 1.0;
  const Eigen::MatrixXd k(assemble(*mesh, c).K);
  CHECK((k - k.transpose()).norm() <= 1e-10 * k.norm());
}

TEST_CASE("goal constraint on the two-node toy system") {
  SparseSystem sys;
  sys.K.resize(2, 2);
  sys.K.insert(0, 0) = 2;
  sys.K.insert(0, 1) = 1;
  sys.K.insert(1, 0) = 1;
  sys.K.insert(1, 1) = 2;
  sys.F = Eigen::Vector2d(1, 1);
  const SparseSystem c1 = constrain_goal(sys, 0);
  const Eigen::VectorXd a = solve(c1);
  CHECK(a[0] == 0.0);
  CHECK(a[1] == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(c1.F[0] == 0.0);

  const SparseSystem c2 = constrain_goal(c1, 0);
  CHECK((Eigen::MatrixXd(c2.K) - Eigen::MatrixXd(c1.K)).norm() == 0.0);
  CHECK((c2.F - c1.F).norm() == 0.0);

  SparseSystem id;
  id.K.resize(3, 3);
  id.K.setIdentity();
  id.F = Eigen::Vector3d(1, -2, 4);
  CHECK((solve(id) - id.F).norm() < 1e-15);
}

TEST_CASE("mesh construction") {
  const auto st = square_states(20, 2.0, 18, 18);
  const Mesh m1 = build_mesh(st, 1);
  CHECK(m1.num_nodes() == 400);
  CHECK(m1.num_triangles() == 722);
  const Mesh m2 = build_mesh(st, 2);
  CHECK(m2.num_nodes() == 200);
  const Mesh tiny = build_mesh(square_states(2, 2.0, 1, 1), 1);
  CHECK(tiny.num_nodes() == 4);
  CHECK(tiny.num_triangles() == 2);

  std::set<StateId> s1(m1.node_to_state().begin(), m1.node_to_state().end());
  for (StateId s : m2.node_to_state()) CHECK(s1.count(s) == 1);
  CHECK(m1.node_to_state()[static_cast<size_t>(m1.goal_node())] == st.goal());
  CHECK(m2.node_to_state()[static_cast<size_t>(m2.goal_node())] == st.goal());

  // Odd-parity goal is force-included.
  const auto odd = square_states(10, 2.0, 8, 7);
  const Mesh m3 = build_mesh(odd, 2);
  CHECK(m3.node_to_state()[static_cast<size_t>(m3.goal_node())] == odd.goal());

  for (const Mesh* m : {&m1, &m2, &m3}) {
    for (int t = 0; t < m->num_triangles(); ++t) CHECK(m->area(t) > 1e-12);
  }

  CHECK_THROWS_AS(Mesh({{0, 0}, {1, 0}, {2, 0}}, {{0, 1, 2}}, {0, 1, 2}, 0), MeshError);
}

TEST_CASE("P1 evaluation") {
  const auto mesh = std::make_shared<const Mesh>(build_mesh(square_states(12, 2.0, 10, 10), 1));
  auto lin = [](const Point2& p) { return 2 * p.x - p.y; };
  const auto v = sampled(mesh, lin);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(1.0, 23.0);
  for (int n = 0; n < 100; ++n) {
    const Point2 p{u(rng), u(rng)};
    CHECK(std::abs(v->evaluate(p) - lin(p)) < 1e-12);
    const Eigen::Vector2d g = v->gradient(p);
    CHECK(std::abs(g.x() - 2) < 1e-12);
    CHECK(std::abs(g.y() + 1) < 1e-12);
    const auto loc = mesh->locate(p);
    REQUIRE(loc);
    double sum = 0.0;
    for (double b : loc->bary) {
      CHECK(b >= -1e-12);
      sum += b;
    }
    CHECK(std::abs(sum - 1) < 1e-12);
  }
  for (int i = 0; i < mesh->num_nodes(); ++i) {
    CHECK(v->evaluate(mesh->nodes()[static_cast<size_t>(i)]) == v->coefficients()[i]);
  }
  CHECK(v->gradient(mesh->nodes()[40]).isApprox(Eigen::Vector2d(2, -1)));
  CHECK_THROWS_AS(v->evaluate({0.5, 0.5}), DomainError);
  CHECK_THROWS_AS(v->gradient({30, 5}), DomainError);

  const auto constant = sampled(mesh, [](const Point2&) { return 4.0; });
  CHECK(constant->gradient({7.3, 9.1}).norm() < 1e-14);
  CHECK(constant->node_hessian(50).hessian.norm() < 1e-9);

  // Centroid of a triangle with nodal values (0, 3, 6).
  const Mesh one({{0, 0}, {1, 0}, {0, 1}}, {{0, 1, 2}}, {0, 1, 2}, 0);
  const ContinuousValue c(std::make_shared<const Mesh>(one), Eigen::Vector3d(0, 3, 6));
  CHECK(c.evaluate({1.0 / 3, 1.0 / 3}) == doctest::Approx(3.0));
}

TEST_CASE("evaluation is continuous across shared edges") {
  const auto mesh = std::make_shared<const Mesh>(build_mesh(square_states(10, 2.0, 8, 8), 2));
  std::mt19937_64 rng(21);
  std::normal_distribution<double> g;
  Eigen::VectorXd a(mesh->num_nodes());
  for (int i = 0; i < a.size(); ++i) a[i] = g(rng);
  // Interior edges, from triangle adjacency.
  std::map<std::pair<int, int>, int> seen;
  std::vector<std::pair<int, int>> shared;
  for (const auto& tri : mesh->triangles()) {
    for (int e = 0; e < 3; ++e) {
      const auto key = std::minmax(tri[e], tri[(e + 1) % 3]);
      if (++seen[key] == 2) shared.push_back(key);
    }
  }
  REQUIRE(!shared.empty());
  std::uniform_real_distribution<double> u(0.05, 0.95);
  std::uniform_int_distribution<size_t> pick(0, shared.size() - 1);
  int checked = 0;
  for (int n = 0; n < 1000; ++n) {
    const auto [i, j] = shared[pick(rng)];
    const double t = u(rng);
    const Point2 &p = mesh->nodes()[static_cast<size_t>(i)], &q = mesh->nodes()[static_cast<size_t>(j)];
    const Point2 x{p.x + t * (q.x - p.x), p.y + t * (q.y - p.y)};
    const auto locs = mesh->locate_all(x);
    REQUIRE(locs.size() >= 2);
    std::vector<double> vals;
    for (const auto& l : locs) {
      const auto& tri = mesh->triangles()[static_cast<size_t>(l.triangle)];
      vals.push_back(l.bary[0] * a[tri[0]] + l.bary[1] * a[tri[1]] + l.bary[2] * a[tri[2]]);
    }
    for (double v : vals) CHECK(std::abs(v - vals[0]) < 1e-12);
    ++checked;
  }
  CHECK(checked == 1000);
}

TEST_CASE("recovered derivatives") {
  SUBCASE("x^2 and xy on a structured interior patch") {
    const auto mesh = std::make_shared<const Mesh>(build_mesh(square_states(10, 1.0, 9, 9), 1));
    const int node = *mesh->node_of_state(square_states(10, 1.0, 9, 9).id(4, 5));
    const auto vx2 = sampled(mesh, [](const Point2& p) { return p.x * p.x; });
    const auto vxy = sampled(mesh, [](const Point2& p) { return p.x * p.y; });
    const auto hx2 = vx2->node_hessian(node);
    const auto hxy = vxy->node_hessian(node);
    CHECK(!hx2.fallback);
    CHECK((hx2.hessian - (Eigen::Matrix2d() << 2, 0, 0, 0).finished()).norm() < 1e-6);
    CHECK((hxy.hessian - (Eigen::Matrix2d() << 0, 1, 1, 0).finished()).norm() < 1e-6);
    CHECK((hxy.hessian - hxy.hessian.transpose()).norm() == 0.0);
    const auto lin = sampled(mesh, [](const Point2& p) { return 3 * p.x + p.y; });
    CHECK(lin->node_hessian(node).hessian.norm() < 1e-9);
    const auto patch = node_patch(*mesh, node, 1);
    CHECK(patch.size() == 7);
    const auto direct = fit_patch_hessian(*mesh, vxy->coefficients(), mesh->nodes()[static_cast<size_t>(node)], patch);
    CHECK((direct.hessian - hxy.hessian).norm() < 1e-12);
  }
  SUBCASE("small patches fall back to zero") {
    const auto mesh = std::make_shared<const Mesh>(build_mesh(square_states(3, 1.0, 2, 2), 1));
    const auto v = sampled(mesh, [](const Point2& p) { return p.x * p.x; });
    // The corner node (0, 0) touches one triangle: three patch nodes.
    const auto h = v->node_hessian(*mesh->node_of_state(0));
    CHECK(h.fallback);
    CHECK(h.hessian.norm() == 0.0);
    CHECK(v->hessian_fallbacks() > 0);
  }
  SUBCASE("gradient of x^2 at interior nodes") {
    for (int n : {10, 20}) {
      const double h = 10.0 / n;
      const StateSpace st({0, 0}, h, n + 1, n + 1, n, n);
      const auto mesh = std::make_shared<const Mesh>(build_mesh(st, 1));
      const auto v = sampled(mesh, [](const Point2& p) { return p.x * p.x; });
      for (int j = 1; j < n; ++j) {
        for (int i = 1; i < n; ++i) {
          const Point2 p = st.position(st.id(i, j));
          CHECK(std::abs(v->gradient(p).x() - 2 * p.x) <= 2 * h + 1e-12);
        }
      }
    }
  }
}

TEST_CASE("manufactured solution converges at second order") {
  const double gamma = 0.95;
  auto exact = [](const Point2& p) { return std::cos(pi * p.x) * std::cos(pi * p.y) + 1.0; };
  auto source = [&](const Point2& p) {
    const double cc = std::cos(pi * p.x) * std::cos(pi * p.y);
    return gamma * pi * pi * cc + (1 - gamma) * (cc + 1.0);
  };
  std::vector<double> errors;
  // The single Dirichlet node perturbs the near-singular constant mode (reaction 0.05), which
  // costs a logarithmic factor: coarser levels sit just below second order.
  for (int n : {16, 32, 64}) {
    const auto mesh = unit_square_mesh(n);
    REQUIRE(std::abs(exact(mesh->nodes()[static_cast<size_t>(mesh->goal_node())])) < 1e-14);
    const auto c = pure_diffusion(*mesh, gamma, source);
    const Eigen::VectorXd a = solve(constrain_goal(assemble(*mesh, c), mesh->goal_node()));
    CHECK(a[mesh->goal_node()] == 0.0);
    errors.push_back(l2_error(ContinuousValue(mesh, a), exact));
  }
  for (size_t i = 1; i < errors.size(); ++i) {
    const double rate = std::log2(errors[i - 1] / errors[i]);
    INFO("level " << i << " rate " << rate);
    CHECK(rate >= 1.8);
  }
}
