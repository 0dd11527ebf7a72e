#pragma once

#include <cstddef>
#include <filesystem>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "prkit/image.hpp"

namespace prkit {

/// Fills the masked region of an image. Implementations must return an image
/// of the input resolution, be deterministic for a fixed configuration and
/// be safe to call concurrently on distinct images.
class Restorer {
 public:
  virtual ~Restorer() = default;
  virtual Image restore(const Image& image, const Mask& mask) const = 0;
  virtual std::string name() const = 0;
};

// ---------------------------------------------------------------------------
// Diffusion (harmonic) filling

struct DiffusionOptions {
  int iters = 2000;
  double tol = 1e-5;
};

/// Jacobi iteration of 4-neighbour averaging over the masked pixels until the
/// largest per-sweep change drops below `tol` or `iters` sweeps ran.
///
/// Hole pixels start from the input values clamped per channel to the range
/// of their connected hole's boundary, so every filled value stays inside
/// [boundary min, boundary max]. Unmasked pixels are never written.
Image diffusion_restore(const Image& image, const Mask& mask, int iters = 2000, double tol = 1e-5);

// ---------------------------------------------------------------------------
// Exemplar (patch-based) filling

struct ExemplarOptions {
  int patch_size = 9;
  int search_radius = 64;
};

struct ExemplarResult {
  Image image;
  /// Hole pixels that no exemplar reached and were left to diffusion.
  std::size_t fallback_pixels = 0;
};

/// Greedy exemplar fill in priority order (confidence times isophote strength
/// along the front normal). Each step copies the unknown part of the source
/// patch with the smallest SSD over the known pixels of the target patch.
/// Source patches lie fully outside the hole, fully inside the image and
/// within `search_radius` of the target. Pixels without any candidate fall
/// back to diffusion.
ExemplarResult exemplar_restore(const Image& image, const Mask& mask, int patch_size = 9,
                                int search_radius = 64);

// ---------------------------------------------------------------------------
// Restorer implementations

class IdentityRestorer final : public Restorer {
 public:
  Image restore(const Image& image, const Mask&) const override { return image; }
  std::string name() const override { return "identity"; }
};

class DiffusionRestorer final : public Restorer {
 public:
  explicit DiffusionRestorer(DiffusionOptions options = {});
  Image restore(const Image& image, const Mask& mask) const override;
  std::string name() const override { return "diffusion"; }
  const DiffusionOptions& options() const { return options_; }

 private:
  DiffusionOptions options_;
};

class ExemplarRestorer final : public Restorer {
 public:
  explicit ExemplarRestorer(ExemplarOptions options = {});
  Image restore(const Image& image, const Mask& mask) const override;
  std::string name() const override { return "exemplar"; }
  const ExemplarOptions& options() const { return options_; }

 private:
  ExemplarOptions options_;
};

/// Runs an external program as `<command> <source.png> <mask.png> <out.png>`.
/// Images cross the boundary as 8-bit PNGs; a nonzero exit status, a missing
/// output or a resolution change raises RestorerError.
class SubprocessRestorer final : public Restorer {
 public:
  explicit SubprocessRestorer(std::string command);
  Image restore(const Image& image, const Mask& mask) const override;
  std::string name() const override { return "subprocess"; }

 private:
  std::string command_;
};

/// Decorator that records every (image, mask) pair handed to the wrapped
/// restorer.
class RecordingRestorer final : public Restorer {
 public:
  struct Call {
    Image image;
    Mask mask;
  };

  explicit RecordingRestorer(const Restorer& inner) : inner_(inner) {}
  Image restore(const Image& image, const Mask& mask) const override;
  std::string name() const override { return inner_.name(); }
  std::vector<Call> calls() const;

 private:
  const Restorer& inner_;
  mutable std::mutex mutex_;
  mutable std::vector<Call> calls_;
};

// ---------------------------------------------------------------------------
// Removal pipelines

/// Subtract then inpaint: compose_masked(I, G(subtract_person(I, m), m), m).
Image remove_legacy(const Image& source, const Mask& mask, const Restorer& g);

/// Mask-guided: compose_masked(I, G(I, m), m). The restorer sees the person.
Image remove_mask_guided(const Image& source, const Mask& mask, const Restorer& g);

struct CoarseToFine {
  Image result;
  /// Every iterate, first entry equal to remove_mask_guided.
  std::vector<Image> iterates;
};

/// Repeats compose_masked(I, G(previous, m), m) with I fixed to the original
/// source, `iters` predictions in total.
CoarseToFine remove_coarse_to_fine(const Image& source, const Mask& mask, const Restorer& g,
                                   int iters);

enum class RemovalMode { legacy_inpaint, mask_guided };

std::string to_string(RemovalMode mode);
RemovalMode parse_removal_mode(const std::string& text);

struct RemovalConfig {
  RemovalMode mode = RemovalMode::mask_guided;
  std::string restorer = "diffusion";
  DiffusionOptions diffusion;
  ExemplarOptions exemplar;
  std::string restorer_command;
  int refine_iters = 2;
  int mask_dilation = 1;
};

void validate(const RemovalConfig& config);

/// Builds the restorer named by the config: identity, diffusion, exemplar or
/// subprocess.
std::unique_ptr<Restorer> make_restorer(const RemovalConfig& config);

struct RemovalOutput {
  Image prediction;
  /// The mask actually handed to the pipeline (the input dilated by
  /// `mask_dilation`). The prediction equals the source outside it.
  Mask working_mask;
  std::vector<Image> iterates;
};

/// Full removal per config. An empty mask returns the source untouched.
/// Legacy mode runs a single pass; refine_iters applies to mask-guided mode.
RemovalOutput remove_person(const Image& source, const Mask& mask, const Restorer& g,
                            const RemovalConfig& config);

}  // namespace prkit
