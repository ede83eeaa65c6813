#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "docpretext/image.hpp"
#include "docpretext/permset.hpp"
#include "docpretext/rng.hpp"
#include "docpretext/sample.hpp"

namespace docpretext {

// Patch grid geometry. With the defaults a 384 image splits into nine
// 128 cells, from which 118 patches are drawn with 10 px of slack.
struct GridSpec {
  int image_size = 384;
  int grid = 3;
  int patch = 118;
  int jitter = 10;

  int cell() const {
    if (grid <= 0 || image_size % grid != 0)
      throw DomainError("GridSpec: grid must divide image_size");
    return image_size / grid;
  }

  void validate() const {
    int c = cell();
    if (patch <= 0 || patch > c)
      throw DomainError("GridSpec: patch must be in 1..cell");
    if (jitter < 0 || patch + jitter > c)
      throw DomainError("GridSpec: patch + jitter must be <= cell");
  }
};

// Row-major cells: cell (i,j) sits at (j*cell, i*cell).
inline std::vector<Rect> grid_cells(const GridSpec& spec) {
  int c = spec.cell();
  std::vector<Rect> cells;
  cells.reserve(static_cast<std::size_t>(spec.grid) * spec.grid);
  for (int i = 0; i < spec.grid; ++i)
    for (int j = 0; j < spec.grid; ++j)
      cells.push_back(Rect{j * c, i * c, c, c});
  return cells;
}

// Patch offset inside a cell: centered in the unused slack, plus a
// uniform draw of at most `jitter` pixels per axis. jitter = 0 is the
// deterministic centered crop.
inline GrayImage sample_patch(const GrayImage& img, const Rect& cell,
                              const GridSpec& spec, Rng& rng) {
  if (img.height != spec.image_size || img.width != spec.image_size)
    throw DomainError("sample_patch: image does not match spec.image_size");
  spec.validate();
  int slack = cell.w - spec.patch;
  int base = (slack - spec.jitter) / 2;
  int ox = base + static_cast<int>(rng.below(static_cast<std::uint64_t>(spec.jitter) + 1));
  int oy = base + static_cast<int>(rng.below(static_cast<std::uint64_t>(spec.jitter) + 1));
  return crop(img, Rect{cell.x + ox, cell.y + oy, spec.patch, spec.patch});
}

// Scrambled mosaic: the patch from source cell i lands at destination
// cell p[i] of a (grid*patch)^2 canvas, and the permutation's label is
// the target. The assembled image goes to the network whole.
inline PretextSample make_jigsaw_whole(const GrayImage& img,
                                       const PermutationSet& set,
                                       const GridSpec& spec, Rng& rng) {
  spec.validate();
  if (img.height != spec.image_size || img.width != spec.image_size)
    throw DomainError("make_jigsaw_whole: image must be spec.image_size square");
  if (set.n_cells != spec.grid * spec.grid)
    throw DomainError("make_jigsaw_whole: permutation arity != grid cells");
  if (set.size() == 0) throw DomainError("make_jigsaw_whole: empty permutation set");

  int pick = static_cast<int>(rng.below(set.size()));
  const Permutation& p = set.perms[static_cast<std::size_t>(pick)];

  std::vector<Rect> cells = grid_cells(spec);
  GrayImage canvas(spec.grid * spec.patch, spec.grid * spec.patch);
  for (int i = 0; i < set.n_cells; ++i) {
    GrayImage patch = sample_patch(img, cells[static_cast<std::size_t>(i)], spec, rng);
    int dest = p.order[static_cast<std::size_t>(i)];
    int dy = (dest / spec.grid) * spec.patch;
    int dx = (dest % spec.grid) * spec.patch;
    for (int y = 0; y < spec.patch; ++y)
      for (int x = 0; x < spec.patch; ++x)
        canvas.at(dy + y, dx + x) = patch.at(y, x);
  }

  PretextSample s;
  s.task = Task::jigsaw_whole;
  s.inputs.push_back(std::move(canvas));
  s.target = label_of(set, p);
  return s;
}

// Assembles the mosaic for a given permutation (no random draw). Used by
// round-trip checks and the shard exporter.
inline GrayImage assemble_jigsaw(const GrayImage& img, const Permutation& p,
                                 const GridSpec& spec, Rng& rng) {
  spec.validate();
  if (img.height != spec.image_size || img.width != spec.image_size)
    throw DomainError("assemble_jigsaw: image must be spec.image_size square");
  std::vector<Rect> cells = grid_cells(spec);
  if (p.size() != cells.size())
    throw DomainError("assemble_jigsaw: permutation arity != grid cells");
  GrayImage canvas(spec.grid * spec.patch, spec.grid * spec.patch);
  for (std::size_t i = 0; i < cells.size(); ++i) {
    GrayImage patch = sample_patch(img, cells[i], spec, rng);
    int dest = p.order[i];
    int dy = (dest / spec.grid) * spec.patch;
    int dx = (dest % spec.grid) * spec.patch;
    for (int y = 0; y < spec.patch; ++y)
      for (int x = 0; x < spec.patch; ++x)
        canvas.at(dy + y, dx + x) = patch.at(y, x);
  }
  return canvas;
}

// Neighbor classes, clockwise from the top-left cell.
// {0:TL, 1:T, 2:TR, 3:R, 4:BR, 5:B, 6:BL, 7:L}
inline constexpr std::array<int, 8> kNeighborCell = {0, 1, 2, 5, 8, 7, 6, 3};

// Siamese pair (center patch, neighbor patch); target is the neighbor's
// clockwise class. Patches stay separate inputs, never stitched.
inline PretextSample make_relative_pair(const GrayImage& img,
                                        const GridSpec& spec, Rng& rng) {
  if (spec.grid != 3)
    throw DomainError("make_relative_pair: grid must be 3 (center cell needed)");
  spec.validate();
  if (img.height != spec.image_size || img.width != spec.image_size)
    throw DomainError("make_relative_pair: image must be spec.image_size square");

  int cls = static_cast<int>(rng.below(8));
  std::vector<Rect> cells = grid_cells(spec);
  GrayImage center = sample_patch(img, cells[4], spec, rng);
  GrayImage neighbor =
      sample_patch(img, cells[static_cast<std::size_t>(kNeighborCell[static_cast<std::size_t>(cls)])], spec, rng);

  PretextSample s;
  s.task = Task::relative_patches;
  s.inputs.push_back(std::move(center));
  s.inputs.push_back(std::move(neighbor));
  s.target = cls;
  return s;
}

// Target k in 0..3; input is the image rotated k quarter turns CCW.
inline PretextSample make_rotation_sample(const GrayImage& img, Rng& rng) {
  int k = static_cast<int>(rng.below(4));
  PretextSample s;
  s.task = Task::rotations;
  s.inputs.push_back(rotate90(img, k));
  s.target = k;
  return s;
}

// Four flip classes: 0 identity, 1 horizontal, 2 vertical, 3 both
// (= 180 degree rotation). All keep text lines horizontal.
inline GrayImage apply_flip_class(const GrayImage& img, int cls) {
  switch (cls) {
    case 0: return img;
    case 1: return flip(img, FlipAxis::horizontal);
    case 2: return flip(img, FlipAxis::vertical);
    case 3: return rotate90(img, 2);
    default: throw DomainError("apply_flip_class: class must be in 0..3");
  }
}

inline PretextSample make_flip_sample(const GrayImage& img, Rng& rng) {
  int cls = static_cast<int>(rng.below(4));
  PretextSample s;
  s.task = Task::flips;
  s.inputs.push_back(apply_flip_class(img, cls));
  s.target = cls;
  return s;
}

// Label-space size per task; lda/nat depend on run resources.
inline int label_space_size(Task t, const PermutationSet* set = nullptr) {
  switch (t) {
    case Task::jigsaw_whole:
      if (!set) throw ContractError("label_space_size: jigsaw needs a permset");
      return static_cast<int>(set->size());
    case Task::relative_patches: return 8;
    case Task::rotations: return 4;
    case Task::flips: return 4;
    default:
      throw ContractError("label_space_size: task has no fixed class count");
  }
}

}  // namespace docpretext
