#pragma once

#include <cmath>
#include <string>
#include <variant>
#include <vector>

#include "docpretext/common.hpp"
#include "docpretext/image.hpp"

namespace docpretext {

enum class Task {
  jigsaw_whole,
  relative_patches,
  rotations,
  flips,
  lda_topics,
  nat,
};

inline const char* task_name(Task t) {
  switch (t) {
    case Task::jigsaw_whole: return "jigsaw_whole";
    case Task::relative_patches: return "relative_patches";
    case Task::rotations: return "rotations";
    case Task::flips: return "flips";
    case Task::lda_topics: return "lda_topics";
    case Task::nat: return "nat";
  }
  throw ConfigError("task_name: bad task tag");
}

inline const std::vector<std::string>& task_names() {
  static const std::vector<std::string> names = {
      "jigsaw_whole", "relative_patches", "rotations",
      "flips",        "lda_topics",       "nat"};
  return names;
}

inline Task task_from_name(const std::string& s) {
  if (s == "jigsaw_whole") return Task::jigsaw_whole;
  if (s == "relative_patches") return Task::relative_patches;
  if (s == "rotations") return Task::rotations;
  if (s == "flips") return Task::flips;
  if (s == "lda_topics") return Task::lda_topics;
  if (s == "nat") return Task::nat;
  throw ConfigError("unknown task '" + s + "'");
}

// Topic distribution used as a training target; sums to 1.
struct SoftLabel {
  std::vector<double> theta;

  void validate() const {
    double sum = 0.0;
    for (double v : theta) {
      if (v < 0.0) throw DomainError("SoftLabel: negative entry");
      sum += v;
    }
    if (std::abs(sum - 1.0) > 1e-9)
      throw DomainError("SoftLabel: entries sum to " + std::to_string(sum));
  }
};

// Fixed unit-sphere vector used as a NAT training target.
struct SphereTarget {
  std::vector<double> v;

  void validate() const {
    double sq = 0.0;
    for (double x : v) sq += x * x;
    if (std::abs(std::sqrt(sq) - 1.0) > 1e-9)
      throw DomainError("SphereTarget: vector is not unit-norm");
  }
};

// One training example: one or two inputs plus the task's target.
struct PretextSample {
  Task task = Task::flips;
  std::vector<GrayImage> inputs;
  std::variant<int, SoftLabel, SphereTarget> target;

  int class_index() const {
    if (const int* v = std::get_if<int>(&target)) return *v;
    throw ContractError("PretextSample: target is not a class index");
  }
  const SoftLabel& soft_label() const {
    if (const auto* v = std::get_if<SoftLabel>(&target)) return *v;
    throw ContractError("PretextSample: target is not a soft label");
  }
  const SphereTarget& sphere_target() const {
    if (const auto* v = std::get_if<SphereTarget>(&target)) return *v;
    throw ContractError("PretextSample: target is not a sphere vector");
  }
};

}  // namespace docpretext
