#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <numeric>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "docpretext/common.hpp"
#include "docpretext/rng.hpp"

namespace docpretext {

// order[i] = destination cell index for source position i.
struct Permutation {
  std::vector<std::uint8_t> order;

  bool operator==(const Permutation&) const = default;
  auto operator<=>(const Permutation&) const = default;

  std::size_t size() const { return order.size(); }

  Permutation inverse() const {
    Permutation inv;
    inv.order.resize(order.size());
    for (std::size_t i = 0; i < order.size(); ++i) inv.order[order[i]] = static_cast<std::uint8_t>(i);
    return inv;
  }
};

inline int hamming(const Permutation& p, const Permutation& q) {
  if (p.size() != q.size())
    throw DomainError("hamming: permutation lengths differ");
  int d = 0;
  for (std::size_t i = 0; i < p.size(); ++i)
    if (p.order[i] != q.order[i]) ++d;
  return d;
}

struct PermutationSet {
  int n_cells = 0;
  std::uint64_t seed = 0;
  std::vector<Permutation> perms;
  std::map<std::vector<std::uint8_t>, int> index;

  std::size_t size() const { return perms.size(); }

  void rebuild_index() {
    index.clear();
    for (std::size_t i = 0; i < perms.size(); ++i)
      index[perms[i].order] = static_cast<int>(i);
  }
};

inline int label_of(const PermutationSet& set, const Permutation& p) {
  auto it = set.index.find(p.order);
  if (it == set.index.end())
    throw LookupError("label_of: permutation not in set");
  return it->second;
}

namespace detail {

inline std::uint64_t factorial(int n) {
  std::uint64_t f = 1;
  for (int i = 2; i <= n; ++i) f *= static_cast<std::uint64_t>(i);
  return f;
}

// All n! permutations in lexicographic order, flattened n bytes each.
inline std::vector<std::uint8_t> enumerate_perms(int n) {
  std::vector<std::uint8_t> cur(static_cast<std::size_t>(n));
  std::iota(cur.begin(), cur.end(), std::uint8_t{0});
  std::vector<std::uint8_t> all;
  all.reserve(factorial(n) * static_cast<std::uint64_t>(n));
  do {
    all.insert(all.end(), cur.begin(), cur.end());
  } while (std::next_permutation(cur.begin(), cur.end()));
  return all;
}

}  // namespace detail

// Greedy selection approximating the maximal average Hamming distance:
// start from a seeded uniform pick, then repeatedly take the candidate
// with the largest summed distance to the chosen set, lexicographically
// smallest on ties. Distance sums are maintained incrementally, so each
// step costs one pass over all n! candidates.
inline PermutationSet select_permutations(int n_cells, int count,
                                          std::uint64_t seed) {
  if (n_cells < 1) throw DomainError("select_permutations: n_cells must be >= 1");
  if (n_cells > 9)
    throw UnsupportedError(
        "select_permutations: n_cells > 9 would need non-exhaustive search");
  std::uint64_t total = detail::factorial(n_cells);
  if (count < 1 || static_cast<std::uint64_t>(count) > total)
    throw DomainError("select_permutations: count must be in 1..n_cells!");

  std::vector<std::uint8_t> all = detail::enumerate_perms(n_cells);
  auto cand = [&all, n_cells](std::uint64_t i) {
    return all.data() + i * static_cast<std::uint64_t>(n_cells);
  };

  std::vector<std::uint32_t> dist_sum(total, 0);
  std::vector<char> taken(total, 0);

  PermutationSet set;
  set.n_cells = n_cells;
  set.seed = seed;
  set.perms.reserve(static_cast<std::size_t>(count));

  Rng rng(Rng::derive(seed, "permset"));
  std::uint64_t first = rng.below(total);

  std::uint64_t pick = first;
  for (int chosen = 0; chosen < count; ++chosen) {
    if (chosen > 0) {
      // argmax of dist_sum over untaken candidates; ascending scan with a
      // strict comparison lands on the lexicographically smallest winner.
      std::uint32_t best = 0;
      std::uint64_t best_i = total;
      for (std::uint64_t i = 0; i < total; ++i) {
        if (taken[i]) continue;
        if (best_i == total || dist_sum[i] > best) {
          best = dist_sum[i];
          best_i = i;
        }
      }
      pick = best_i;
    }
    taken[pick] = 1;
    const std::uint8_t* p = cand(pick);
    set.perms.push_back(
        Permutation{std::vector<std::uint8_t>(p, p + n_cells)});
    for (std::uint64_t i = 0; i < total; ++i) {
      const std::uint8_t* q = cand(i);
      std::uint32_t d = 0;
      for (int j = 0; j < n_cells; ++j)
        if (p[j] != q[j]) ++d;
      dist_sum[i] += d;
    }
  }
  set.rebuild_index();
  return set;
}

inline double average_pairwise_hamming(const PermutationSet& set) {
  if (set.size() < 2) return 0.0;
  std::uint64_t sum = 0, pairs = 0;
  for (std::size_t i = 0; i < set.size(); ++i)
    for (std::size_t j = i + 1; j < set.size(); ++j) {
      sum += static_cast<std::uint64_t>(hamming(set.perms[i], set.perms[j]));
      ++pairs;
    }
  return static_cast<double>(sum) / static_cast<double>(pairs);
}

inline nlohmann::json permset_to_json(const PermutationSet& set) {
  nlohmann::json j;
  j["n_cells"] = set.n_cells;
  j["seed"] = set.seed;
  auto perms = nlohmann::json::array();
  for (const auto& p : set.perms) {
    auto arr = nlohmann::json::array();
    for (auto v : p.order) arr.push_back(static_cast<int>(v));
    perms.push_back(arr);
  }
  j["perms"] = perms;
  return j;
}

inline PermutationSet permset_from_json(const nlohmann::json& j) {
  PermutationSet set;
  try {
    set.n_cells = j.at("n_cells").get<int>();
    set.seed = j.at("seed").get<std::uint64_t>();
    for (const auto& arr : j.at("perms")) {
      Permutation p;
      for (const auto& v : arr) p.order.push_back(v.get<std::uint8_t>());
      if (static_cast<int>(p.order.size()) != set.n_cells)
        throw DecodeError("permset: permutation length != n_cells");
      set.perms.push_back(std::move(p));
    }
  } catch (const nlohmann::json::exception& e) {
    throw DecodeError(std::string("permset: bad JSON: ") + e.what());
  }
  set.rebuild_index();
  if (set.index.size() != set.perms.size())
    throw DecodeError("permset: duplicate permutations");
  return set;
}

}  // namespace docpretext
