#include "occur/transport.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "occur/occlusion.hpp"

namespace occur {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kFlowEps = 1e-15;

void require_same_bins(const Histogram& p, const Histogram& q, const char* what) {
  if (p.bins() != q.bins() || !p.same_bins(q)) {
    throw std::invalid_argument(std::string(what) + ": histograms have different bins (" +
                                std::to_string(p.bins()) + " vs " + std::to_string(q.bins()) + ")");
  }
}

double log_sum_exp(std::span<const double> xs) {
  double hi = -kInf;
  for (double x : xs) hi = std::max(hi, x);
  if (hi == -kInf) return -kInf;
  double s = 0.0;
  for (double x : xs) s += std::exp(x - hi);
  return hi + std::log(s);
}

}  // namespace

CostMatrix::CostMatrix(std::size_t bins, std::vector<double> values) : bins_(bins), values_(std::move(values)) {
  if (bins_ == 0) throw std::invalid_argument("CostMatrix: need at least one bin");
  if (values_.size() != bins_ * bins_) throw std::invalid_argument("CostMatrix: expected b*b entries");
  for (std::size_t i = 0; i < bins_; ++i) {
    if ((*this)(i, i) != 0.0) throw std::invalid_argument("CostMatrix: diagonal must be zero");
    for (std::size_t j = 0; j < bins_; ++j) {
      double c = (*this)(i, j);
      if (!(c >= 0.0) || !std::isfinite(c)) throw std::invalid_argument("CostMatrix: costs must be finite and >= 0");
      if (c != (*this)(j, i)) throw std::invalid_argument("CostMatrix: costs must be symmetric");
    }
  }
}

CostMatrix CostMatrix::bin_distance(std::size_t bins, double exponent, double scale) {
  std::vector<double> values(bins * bins);
  for (std::size_t i = 0; i < bins; ++i) {
    for (std::size_t j = 0; j < bins; ++j) {
      double d = scale * std::abs(static_cast<double>(i) - static_cast<double>(j));
      values[i * bins + j] = exponent == 1.0 ? d : std::pow(d, exponent);
    }
  }
  return CostMatrix(bins, std::move(values));
}

double CostMatrix::max() const { return *std::max_element(values_.begin(), values_.end()); }

TransportPlan::TransportPlan(std::size_t bins, std::vector<double> mass) : bins_(bins), mass_(std::move(mass)) {
  if (mass_.size() != bins_ * bins_) throw std::invalid_argument("TransportPlan: expected b*b entries");
  for (double m : mass_) {
    if (!(m >= 0.0)) throw std::invalid_argument("TransportPlan: entries must be >= 0");
  }
}

std::vector<double> TransportPlan::row_marginal() const {
  std::vector<double> rows(bins_, 0.0);
  for (std::size_t i = 0; i < bins_; ++i)
    for (std::size_t j = 0; j < bins_; ++j) rows[i] += (*this)(i, j);
  return rows;
}

std::vector<double> TransportPlan::col_marginal() const {
  std::vector<double> cols(bins_, 0.0);
  for (std::size_t i = 0; i < bins_; ++i)
    for (std::size_t j = 0; j < bins_; ++j) cols[j] += (*this)(i, j);
  return cols;
}

double TransportPlan::cost(const CostMatrix& cost) const {
  double total = 0.0;
  for (std::size_t i = 0; i < bins_; ++i)
    for (std::size_t j = 0; j < bins_; ++j) total += (*this)(i, j) * cost(i, j);
  return total;
}

double TransportPlan::marginal_violation(std::span<const double> p, std::span<const double> q) const {
  double worst = 0.0;
  auto rows = row_marginal();
  auto cols = col_marginal();
  for (std::size_t i = 0; i < bins_; ++i) {
    worst = std::max({worst, std::abs(rows[i] - p[i]), std::abs(cols[i] - q[i])});
  }
  return worst;
}

double w1_1d(const Histogram& p, const Histogram& q) {
  require_same_bins(p, q, "w1_1d");
  double cdf_p = 0.0;
  double cdf_q = 0.0;
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < p.bins(); ++i) {
    cdf_p += p[i];
    cdf_q += q[i];
    total += std::abs(cdf_p - cdf_q);
  }
  return total;
}

TransportSolution solve_transport(const Histogram& p, const Histogram& q, const CostMatrix& cost) {
  const std::size_t b = p.bins();
  if (q.bins() != b || cost.bins() != b) {
    throw std::invalid_argument("solve_transport: histogram and cost sizes disagree");
  }
  if (b > kMaxExactBins) {
    throw std::invalid_argument("solve_transport: " + std::to_string(b) + " bins exceeds the exact-solver bound of " +
                                std::to_string(kMaxExactBins));
  }
  double sum_p = 0.0;
  double sum_q = 0.0;
  for (std::size_t i = 0; i < b; ++i) {
    sum_p += p[i];
    sum_q += q[i];
  }
  if (std::abs(sum_p - sum_q) > TransportPlan::kMarginalTolerance) {
    throw std::invalid_argument("solve_transport: infeasible, total masses differ by " +
                                std::to_string(std::abs(sum_p - sum_q)));
  }

  // Nodes: 0 = source, 1..b = supply bins, b+1..2b = demand bins, 2b+1 = sink.
  const std::size_t source = 0;
  const std::size_t sink = 2 * b + 1;
  const std::size_t nodes = 2 * b + 2;
  auto supply_node = [](std::size_t i) { return 1 + i; };
  auto demand_node = [b](std::size_t j) { return 1 + b + j; };

  std::vector<double> supply(p.masses().begin(), p.masses().end());
  std::vector<double> demand(q.masses().begin(), q.masses().end());
  std::vector<double> flow(b * b, 0.0);
  std::vector<double> potential(nodes, 0.0);
  std::vector<double> dist(nodes);
  std::vector<std::size_t> parent(nodes);
  std::vector<bool> done(nodes);

  // Residual arcs leaving `u`, reported as (v, cost). Arcs back into the
  // source or out of the sink never lie on a shortest source-sink path.
  auto for_each_arc = [&](std::size_t u, auto&& visit) {
    if (u == source) {
      for (std::size_t i = 0; i < b; ++i)
        if (supply[i] > kFlowEps) visit(supply_node(i), 0.0);
    } else if (u <= b) {
      std::size_t i = u - 1;
      for (std::size_t j = 0; j < b; ++j) visit(demand_node(j), cost(i, j));
    } else if (u < sink) {
      std::size_t j = u - 1 - b;
      for (std::size_t i = 0; i < b; ++i)
        if (flow[i * b + j] > kFlowEps) visit(supply_node(i), -cost(i, j));
      if (demand[j] > kFlowEps) visit(sink, 0.0);
    }
  };

  const std::size_t max_augmentations = 16 * b * b + 64;
  for (std::size_t round = 0; round < max_augmentations; ++round) {
    double remaining = 0.0;
    for (double s : supply) remaining += s;
    if (remaining <= kFlowEps) break;

    std::fill(dist.begin(), dist.end(), kInf);
    std::fill(done.begin(), done.end(), false);
    dist[source] = 0.0;
    for (std::size_t iter = 0; iter < nodes; ++iter) {
      std::size_t u = nodes;
      for (std::size_t v = 0; v < nodes; ++v)
        if (!done[v] && dist[v] < kInf && (u == nodes || dist[v] < dist[u])) u = v;
      if (u == nodes) break;
      done[u] = true;
      for_each_arc(u, [&](std::size_t v, double c) {
        double reduced = std::max(0.0, c + potential[u] - potential[v]);
        if (!done[v] && dist[u] + reduced < dist[v]) {
          dist[v] = dist[u] + reduced;
          parent[v] = u;
        }
      });
    }
    if (dist[sink] == kInf) break;
    for (std::size_t v = 0; v < nodes; ++v) potential[v] += std::min(dist[v], dist[sink]);

    double push = kInf;
    for (std::size_t v = sink; v != source; v = parent[v]) {
      std::size_t u = parent[v];
      if (u == source) {
        push = std::min(push, supply[v - 1]);
      } else if (v == sink) {
        push = std::min(push, demand[u - 1 - b]);
      } else if (u > b) {
        push = std::min(push, flow[(v - 1) * b + (u - 1 - b)]);
      }
    }
    for (std::size_t v = sink; v != source; v = parent[v]) {
      std::size_t u = parent[v];
      if (u == source) {
        supply[v - 1] -= push;
      } else if (v == sink) {
        demand[u - 1 - b] -= push;
      } else if (u <= b) {
        flow[(u - 1) * b + (v - 1 - b)] += push;
      } else {
        double& f = flow[(v - 1) * b + (u - 1 - b)];
        f = std::max(0.0, f - push);
      }
    }
  }

  TransportPlan plan(b, std::move(flow));
  double violation = plan.marginal_violation(p.masses(), q.masses());
  if (violation > TransportPlan::kMarginalTolerance) {
    throw std::runtime_error("solve_transport: plan marginals off by " + std::to_string(violation));
  }
  double objective = plan.cost(cost);
  return TransportSolution{std::move(plan), objective};
}

SinkhornResult sinkhorn(const Histogram& p, const Histogram& q, const CostMatrix& cost, double epsilon,
                        std::size_t max_iter, double tol) {
  if (!(epsilon > 0.0)) throw std::invalid_argument("sinkhorn: epsilon must be positive");
  if (!(tol > 0.0)) throw std::invalid_argument("sinkhorn: tol must be positive");
  const std::size_t b = p.bins();
  if (q.bins() != b || cost.bins() != b) throw std::invalid_argument("sinkhorn: histogram and cost sizes disagree");

  std::vector<double> log_p(b), log_q(b);
  for (std::size_t i = 0; i < b; ++i) {
    log_p[i] = p[i] > 0.0 ? std::log(p[i]) : -kInf;
    log_q[i] = q[i] > 0.0 ? std::log(q[i]) : -kInf;
  }
  std::vector<double> f(b, 0.0), g(b, 0.0), scratch(b);

  auto update_f = [&](double eps) {
    for (std::size_t i = 0; i < b; ++i) {
      if (log_p[i] == -kInf) {
        f[i] = -kInf;
        continue;
      }
      for (std::size_t j = 0; j < b; ++j) scratch[j] = (g[j] - cost(i, j)) / eps;
      f[i] = eps * (log_p[i] - log_sum_exp(scratch));
    }
  };
  auto update_g = [&](double eps) {
    for (std::size_t j = 0; j < b; ++j) {
      if (log_q[j] == -kInf) {
        g[j] = -kInf;
        continue;
      }
      for (std::size_t i = 0; i < b; ++i) scratch[i] = (f[i] - cost(i, j)) / eps;
      g[j] = eps * (log_q[j] - log_sum_exp(scratch));
    }
  };
  auto plan_entry = [&](std::size_t i, std::size_t j, double eps) {
    if (f[i] == -kInf || g[j] == -kInf) return 0.0;
    return std::exp((f[i] + g[j] - cost(i, j)) / eps);
  };
  auto row_error = [&](double eps) {
    double err = 0.0;
    for (std::size_t i = 0; i < b; ++i) {
      double row = 0.0;
      for (std::size_t j = 0; j < b; ++j) row += plan_entry(i, j, eps);
      err += std::abs(row - p[i]);
    }
    return err;
  };

  // ε-scaling: coarse phases warm-start the potentials for the target ε.
  std::vector<double> schedule;
  for (double eps = std::max(cost.max(), epsilon); eps > epsilon; eps *= 0.25) schedule.push_back(eps);
  schedule.push_back(epsilon);

  SinkhornResult result{0.0, kInf, 0, false, TransportPlan(b, std::vector<double>(b * b, 0.0))};
  std::size_t used = 0;
  double eps_used = epsilon;
  for (std::size_t phase = 0; phase < schedule.size() && used < max_iter; ++phase) {
    const double eps = schedule[phase];
    eps_used = eps;
    const bool last = phase + 1 == schedule.size();
    const double phase_tol = last ? tol : std::max(tol, 1e-3);
    while (used < max_iter) {
      update_f(eps);
      update_g(eps);
      ++used;
      double err = row_error(eps);
      if (last) result.marginal_error = err;
      if (err <= phase_tol) {
        if (last) result.converged = true;
        break;
      }
    }
  }
  result.iterations = used;

  std::vector<double> mass(b * b, 0.0);
  if (used > 0) {
    for (std::size_t i = 0; i < b; ++i)
      for (std::size_t j = 0; j < b; ++j) mass[i * b + j] = plan_entry(i, j, eps_used);
    // a budget spent before the last phase leaves potentials for a coarser ε
    if (!result.converged && result.marginal_error == kInf) result.marginal_error = row_error(eps_used);
  }
  result.plan = TransportPlan(b, std::move(mass));
  result.cost = result.plan.cost(cost);
  return result;
}

double stage_transition_distance(std::span<const double> levels_t, std::span<const double> levels_next,
                                 std::size_t bins, GroundScale scale) {
  if (levels_t.empty() || levels_next.empty()) {
    throw std::invalid_argument("stage_transition_distance: empty stage");
  }
  double w1 = w1_1d(occlusion_histogram(levels_t, bins), occlusion_histogram(levels_next, bins));
  return scale == GroundScale::bin_index ? w1 : w1 / static_cast<double>(bins);
}

}  // namespace occur
