#pragma once

#include "gradlore/mlp.hpp"
#include "gradlore/numerics/matrix.hpp"
#include "gradlore/numerics/rng.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace gradlore {

/// Square greyscale images, one flattened row per image, pixels in [0, 1].
struct ImageBatch {
  std::size_t side = 0;
  Matrix pixels;

  std::size_t size() const { return pixels.rows(); }
  std::size_t dim() const { return side * side; }
  /// Throws ShapeMismatch on a width mismatch, BadParams on a pixel outside [0, 1].
  void validate() const;
  ImageBatch select(std::span<const std::size_t> rows) const;
};

/// IDX image file (magic 0x00000803). `downsample` > 1 mean-pools k x k
/// blocks; `limit` > 0 keeps only the first `limit` images.
ImageBatch load_idx(std::istream& is, std::size_t downsample = 1, std::size_t limit = 0);
ImageBatch load_idx(const std::filesystem::path& path, std::size_t downsample = 1, std::size_t limit = 0);
/// IDX label file (magic 0x00000801).
std::vector<std::uint8_t> load_idx_labels(std::istream& is);

/// k x k mean pooling; the side must be divisible by k.
ImageBatch mean_pool(const ImageBatch& batch, std::size_t k);

/// Stroke-drawn digit shapes with random jitter; stands in for MNIST when no
/// IDX files are available.
ImageBatch synthetic_digits(std::size_t n, std::size_t side, Rng& rng);

/// Binary PGM (P5) grid, `cols` images per row, one pixel gap.
void write_pgm_grid(std::ostream& os, const ImageBatch& batch, std::size_t cols);

enum class GiTerm {
  gradient,  ///< match input-gradients of D_grad at fakes to the real-image mean
  literal,   ///< match scalar D_grad outputs at fakes to the real-image mean
};

std::string_view to_string(GiTerm t);
GiTerm parse_gi_term(std::string_view name);

struct GanBundle {
  Mlp g;
  Mlp d_std;
  Mlp d_grad;
  double gamma = 1.0;
  std::size_t latent = 32;
  GiTerm term = GiTerm::gradient;
};

/// G: latent -> hidden tanh -> image sigmoid; D: image -> hidden tanh -> 1
/// sigmoid; D_grad starts as a copy of D_std.
GanBundle make_gan(std::size_t latent, std::size_t hidden, std::size_t image_dim, double gamma, GiTerm term,
                   Rng& rng);

/// Generated images for each latent row.
ImageBatch generate_images(const Mlp& g, const Matrix& latents, std::size_t side);

/// Share of correct calls at threshold 0.5 over reals (label 1) and fakes (label 0).
double disc_accuracy(const Mlp& d, const ImageBatch& real, const ImageBatch& fake);

/// Fixed reals and latents used to score D_std around a generator update.
struct EvalSet {
  ImageBatch real;
  Matrix latents;
};

struct StepMetrics {
  double d_loss = 0.0;
  double g_loss = 0.0;
  double grad_term = 0.0;
  double acc_before = 0.0;
  double acc_after = 0.0;
  double acc_delta() const { return acc_after - acc_before; }
};

/// One iteration: draw latents, store D_grad's real-image reference, one BCE
/// step on D_std, copy D_std into D_grad, one step on G (plus the GI term when
/// use_gi). With `eval`, D_std accuracy is measured just before and after the
/// G step. Throws EmptyBatch on an empty real batch, EmptyEval on an empty eval set.
StepMetrics gan_step(GanBundle& b, const ImageBatch& real, bool use_gi, Rng& rng, double lr_g, double lr_d,
                     const EvalSet* eval = nullptr);

/// acc(after) - acc(before) for D_std on the same reals and latents.
double disc_accuracy_delta(const Mlp& d_std, const Mlp& g_before, const Mlp& g_after, const EvalSet& eval);

struct KlStats {
  double mean = 0.0;
  double std = 0.0;
};

/// Per generated image: KL(image histogram || pooled real histogram) over
/// `bins` equal bins on [0, 1], each bin smoothed by `eps` before normalising.
KlStats kl_image_quality(const ImageBatch& generated, const ImageBatch& real, std::size_t bins = 32,
                         double eps = 1e-8);

struct GanConfig {
  std::size_t latent = 32;
  std::size_t hidden = 128;
  std::size_t iterations = 500;
  std::size_t batch_size = 32;
  double lr_g = 0.1;
  double lr_d = 0.1;
  double gamma = 1.0;
  GiTerm term = GiTerm::gradient;
  std::size_t eval_size = 64;
  std::size_t rolling_window = 50;
  std::size_t kl_samples = 200;
  std::size_t kl_bins = 32;
  double kl_eps = 1e-8;
  std::uint64_t seed = 0;

  void validate() const;
};

struct GanIteration {
  std::size_t iteration = 0;
  double acc_delta = 0.0;
  double rolling_mean = 0.0;
  double g_loss = 0.0;
  double d_loss = 0.0;
  double grad_term = 0.0;
};

struct GanRun {
  GanBundle bundle;
  std::vector<GanIteration> metrics;
  KlStats kl_initial;
  KlStats kl_final;
  ImageBatch samples;  ///< final generator on fixed latents
};

/// Runs `iterations` gan_steps on minibatches drawn from `real`. Model init,
/// minibatches and latents come from streams of cfg.seed and are consumed the
/// same way with or without GI.
GanRun train_gan(const GanConfig& cfg, const ImageBatch& real, bool use_gi);

/// iteration,acc_delta,rolling_mean,g_loss,d_loss,grad_term
void write_gan_metrics_csv(std::ostream& os, const std::vector<GanIteration>& metrics);

}  // namespace gradlore
