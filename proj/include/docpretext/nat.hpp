#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "docpretext/common.hpp"
#include "docpretext/rng.hpp"

namespace docpretext {

using Matrix = std::vector<std::vector<double>>;

// Fixed unit-sphere targets plus the current image -> row assignment.
struct TargetBank {
  Matrix targets;  // n x d, unit-norm rows
  std::map<std::string, int> assignment;
  std::uint64_t seed = 0;

  int dim() const { return targets.empty() ? 0 : static_cast<int>(targets[0].size()); }
};

// Rows are i.i.d. standard normal vectors scaled to unit length; the
// initial assignment (by integer id string) is the identity.
inline TargetBank sample_targets(int n, int d, std::uint64_t seed) {
  if (n < 1 || d < 1) throw DomainError("sample_targets: n and d must be >= 1");
  TargetBank bank;
  bank.seed = seed;
  bank.targets.assign(static_cast<std::size_t>(n), std::vector<double>(static_cast<std::size_t>(d)));
  Rng rng(Rng::derive(seed, "nat-targets"));
  for (int i = 0; i < n; ++i) {
    auto& row = bank.targets[static_cast<std::size_t>(i)];
    double sq = 0.0;
    do {
      sq = 0.0;
      for (int j = 0; j < d; ++j) {
        row[static_cast<std::size_t>(j)] = rng.normal();
        sq += row[static_cast<std::size_t>(j)] * row[static_cast<std::size_t>(j)];
      }
    } while (sq == 0.0);
    double inv = 1.0 / std::sqrt(sq);
    for (auto& v : row) v *= inv;
    bank.assignment[std::to_string(i)] = i;
  }
  return bank;
}

namespace detail {

inline void check_unit_rows(const Matrix& m, const char* what) {
  for (const auto& row : m) {
    double sq = 0.0;
    for (double v : row) sq += v * v;
    if (std::abs(std::sqrt(sq) - 1.0) > 1e-6)
      throw DomainError(std::string(what) + ": rows must be unit-norm");
  }
}

inline double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

}  // namespace detail

// Exact optimal assignment (Jonker-Volgenant shortest augmenting paths,
// O(m^3)) maximizing the total feature-target dot product. Returns sigma
// with feature i matched to target row sigma[i].
inline std::vector<int> assign_batch(const Matrix& features,
                                     const Matrix& targets) {
  const auto m = features.size();
  if (m == 0) throw DomainError("assign_batch: empty batch");
  if (targets.size() != m)
    throw DomainError("assign_batch: feature/target row counts differ");
  for (std::size_t i = 0; i < m; ++i)
    if (features[i].size() != targets[0].size() ||
        targets[i].size() != targets[0].size())
      throw DomainError("assign_batch: dimension mismatch");

  const int n = static_cast<int>(m);
  Matrix cost(m, std::vector<double>(m));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      cost[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] =
          -detail::dot(features[static_cast<std::size_t>(i)], targets[static_cast<std::size_t>(j)]);

  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(static_cast<std::size_t>(n) + 1, 0.0);
  std::vector<double> v(static_cast<std::size_t>(n) + 1, 0.0);
  std::vector<int> match(static_cast<std::size_t>(n) + 1, 0);  // column -> row
  std::vector<int> way(static_cast<std::size_t>(n) + 1, 0);
  for (int i = 1; i <= n; ++i) {
    match[0] = i;
    int j0 = 0;
    std::vector<double> minv(static_cast<std::size_t>(n) + 1, inf);
    std::vector<char> used(static_cast<std::size_t>(n) + 1, 0);
    do {
      used[static_cast<std::size_t>(j0)] = 1;
      int i0 = match[static_cast<std::size_t>(j0)];
      double delta = inf;
      int j1 = -1;
      for (int j = 1; j <= n; ++j) {
        if (used[static_cast<std::size_t>(j)]) continue;
        double cur = cost[static_cast<std::size_t>(i0 - 1)][static_cast<std::size_t>(j - 1)] -
                     u[static_cast<std::size_t>(i0)] - v[static_cast<std::size_t>(j)];
        if (cur < minv[static_cast<std::size_t>(j)]) {
          minv[static_cast<std::size_t>(j)] = cur;
          way[static_cast<std::size_t>(j)] = j0;
        }
        if (minv[static_cast<std::size_t>(j)] < delta) {
          delta = minv[static_cast<std::size_t>(j)];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[static_cast<std::size_t>(j)]) {
          u[static_cast<std::size_t>(match[static_cast<std::size_t>(j)])] += delta;
          v[static_cast<std::size_t>(j)] -= delta;
        } else {
          minv[static_cast<std::size_t>(j)] -= delta;
        }
      }
      j0 = j1;
    } while (match[static_cast<std::size_t>(j0)] != 0);
    do {
      int j1 = way[static_cast<std::size_t>(j0)];
      match[static_cast<std::size_t>(j0)] = match[static_cast<std::size_t>(j1)];
      j0 = j1;
    } while (j0 != 0);
  }

  std::vector<int> sigma(m, -1);
  for (int j = 1; j <= n; ++j)
    sigma[static_cast<std::size_t>(match[static_cast<std::size_t>(j)] - 1)] = j - 1;
  return sigma;
}

// Alignment loss: -(1/m) * sum_i f_i . t_i; -1 at perfect alignment.
inline double nat_loss(const Matrix& features, const Matrix& assigned_targets) {
  if (features.empty() || features.size() != assigned_targets.size())
    throw DomainError("nat_loss: row counts differ");
  detail::check_unit_rows(features, "nat_loss features");
  detail::check_unit_rows(assigned_targets, "nat_loss targets");
  double s = 0.0;
  for (std::size_t i = 0; i < features.size(); ++i) {
    if (features[i].size() != assigned_targets[i].size())
      throw DomainError("nat_loss: dimension mismatch");
    s += detail::dot(features[i], assigned_targets[i]);
  }
  return -s / static_cast<double>(features.size());
}

inline nlohmann::json target_bank_to_json(const TargetBank& bank) {
  nlohmann::json j;
  j["seed"] = bank.seed;
  j["d"] = bank.dim();
  j["targets"] = bank.targets;
  nlohmann::json assign = nlohmann::json::object();
  for (const auto& [id, row] : bank.assignment) assign[id] = row;
  j["assignment"] = assign;
  return j;
}

inline TargetBank target_bank_from_json(const nlohmann::json& j) {
  TargetBank bank;
  try {
    bank.seed = j.at("seed").get<std::uint64_t>();
    bank.targets = j.at("targets").get<Matrix>();
    int d = j.at("d").get<int>();
    if (bank.dim() != d) throw DecodeError("target bank: d != target width");
    for (const auto& [id, row] : j.at("assignment").items())
      bank.assignment[id] = row.get<int>();
  } catch (const nlohmann::json::exception& e) {
    throw DecodeError(std::string("target bank: bad JSON: ") + e.what());
  }
  return bank;
}

}  // namespace docpretext
