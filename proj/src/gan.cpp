#include "gradlore/gan.hpp"

#include "gradlore/csv.hpp"
#include "gradlore/error.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>

namespace gradlore {

void ImageBatch::validate() const {
  if (pixels.rows() > 0 && pixels.cols() != dim())
    throw Error(ErrorCode::ShapeMismatch, "ImageBatch: row width differs from side^2");
  for (double v : pixels.data())
    if (!(v >= 0.0 && v <= 1.0)) throw Error(ErrorCode::BadParams, "ImageBatch: pixel outside [0, 1]");
}

ImageBatch ImageBatch::select(std::span<const std::size_t> rows) const {
  ImageBatch out{side, Matrix(rows.size(), dim())};
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i] >= size()) throw Error(ErrorCode::BadParams, "ImageBatch::select: index out of range");
    std::ranges::copy(pixels.row(rows[i]), out.pixels.row(i).begin());
  }
  return out;
}

// --- IDX ---------------------------------------------------------------------------

namespace {

std::uint32_t read_be32(std::istream& is, const char* what) {
  std::array<unsigned char, 4> b{};
  if (!is.read(reinterpret_cast<char*>(b.data()), 4))
    throw Error(ErrorCode::TruncatedFile, std::string("idx: truncated ") + what);
  return (std::uint32_t{b[0]} << 24) | (std::uint32_t{b[1]} << 16) | (std::uint32_t{b[2]} << 8) | b[3];
}

}  // namespace

ImageBatch load_idx(std::istream& is, std::size_t downsample, std::size_t limit) {
  if (downsample == 0) throw Error(ErrorCode::BadParams, "idx: downsample factor must be >= 1");
  const auto magic = read_be32(is, "header");
  if (magic != 0x00000803u) throw Error(ErrorCode::BadMagic, "idx: not an image file (magic mismatch)");
  const std::size_t n = read_be32(is, "header");
  const std::size_t rows = read_be32(is, "header");
  const std::size_t cols = read_be32(is, "header");
  if (rows != cols) throw Error(ErrorCode::ShapeMismatch, "idx: only square images are supported");
  const std::size_t count = limit > 0 ? std::min(limit, n) : n;
  ImageBatch raw{rows, Matrix(count, rows * cols)};
  std::vector<unsigned char> buf(rows * cols);
  for (std::size_t i = 0; i < count; ++i) {
    if (!is.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size())))
      throw Error(ErrorCode::TruncatedFile, "idx: truncated pixel data");
    auto row = raw.pixels.row(i);
    for (std::size_t p = 0; p < buf.size(); ++p) row[p] = buf[p] / 255.0;
  }
  return downsample > 1 ? mean_pool(raw, downsample) : raw;
}

ImageBatch load_idx(const std::filesystem::path& path, std::size_t downsample, std::size_t limit) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "idx: cannot open " + path.string());
  return load_idx(in, downsample, limit);
}

std::vector<std::uint8_t> load_idx_labels(std::istream& is) {
  const auto magic = read_be32(is, "header");
  if (magic != 0x00000801u) throw Error(ErrorCode::BadMagic, "idx: not a label file (magic mismatch)");
  const std::size_t n = read_be32(is, "header");
  std::vector<std::uint8_t> labels(n);
  if (!is.read(reinterpret_cast<char*>(labels.data()), static_cast<std::streamsize>(n)))
    throw Error(ErrorCode::TruncatedFile, "idx: truncated label data");
  return labels;
}

ImageBatch mean_pool(const ImageBatch& batch, std::size_t k) {
  if (k == 0 || batch.side % k != 0)
    throw Error(ErrorCode::BadParams, "mean_pool: side must be divisible by the pooling factor");
  const std::size_t side = batch.side / k;
  ImageBatch out{side, Matrix(batch.size(), side * side)};
  const double inv = 1.0 / static_cast<double>(k * k);
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const auto src = batch.pixels.row(i);
    auto dst = out.pixels.row(i);
    for (std::size_t r = 0; r < side; ++r)
      for (std::size_t c = 0; c < side; ++c) {
        double s = 0.0;
        for (std::size_t dr = 0; dr < k; ++dr)
          for (std::size_t dc = 0; dc < k; ++dc) s += src[(r * k + dr) * batch.side + c * k + dc];
        dst[r * side + c] = s * inv;
      }
  }
  return out;
}

// --- synthetic digits ---------------------------------------------------------------

namespace {

struct Pt {
  double x, y;
};
using Stroke = std::vector<Pt>;

Stroke ellipse(double cx, double cy, double rx, double ry) {
  Stroke s;
  for (int i = 0; i <= 20; ++i) {
    const double t = 2.0 * 3.141592653589793 * i / 20.0;
    s.push_back({cx + rx * std::cos(t), cy + ry * std::sin(t)});
  }
  return s;
}

// Unit-square glyphs, y pointing down.
std::vector<Stroke> glyph(std::size_t digit) {
  switch (digit) {
    case 0: return {ellipse(0.5, 0.5, 0.26, 0.38)};
    case 1: return {{{0.38, 0.25}, {0.52, 0.12}, {0.52, 0.88}}};
    case 2: return {{{0.25, 0.3}, {0.35, 0.15}, {0.6, 0.12}, {0.72, 0.28}, {0.65, 0.45}, {0.25, 0.88}, {0.78, 0.88}}};
    case 3: return {{{0.25, 0.15}, {0.7, 0.15}, {0.45, 0.45}, {0.72, 0.6}, {0.65, 0.85}, {0.25, 0.85}}};
    case 4: return {{{0.65, 0.88}, {0.65, 0.12}, {0.22, 0.62}, {0.8, 0.62}}};
    case 5: return {{{0.75, 0.12}, {0.3, 0.12}, {0.28, 0.45}, {0.6, 0.42}, {0.75, 0.62}, {0.6, 0.86}, {0.25, 0.84}}};
    case 6:
      return {{{0.7, 0.12}, {0.35, 0.4}, {0.28, 0.7}, {0.45, 0.88}, {0.68, 0.8}, {0.7, 0.6}, {0.45, 0.52}, {0.3, 0.65}}};
    case 7: return {{{0.22, 0.14}, {0.78, 0.14}, {0.42, 0.88}}};
    case 8: return {ellipse(0.5, 0.3, 0.2, 0.17), ellipse(0.5, 0.68, 0.24, 0.2)};
    default: return {ellipse(0.48, 0.33, 0.2, 0.18), {{0.68, 0.35}, {0.6, 0.88}}};
  }
}

double segment_distance(Pt p, Pt a, Pt b) {
  const double vx = b.x - a.x, vy = b.y - a.y;
  const double len2 = vx * vx + vy * vy;
  double t = len2 > 0.0 ? ((p.x - a.x) * vx + (p.y - a.y) * vy) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  const double dx = p.x - (a.x + t * vx), dy = p.y - (a.y + t * vy);
  return std::sqrt(dx * dx + dy * dy);
}

}  // namespace

ImageBatch synthetic_digits(std::size_t n, std::size_t side, Rng& rng) {
  if (side < 4) throw Error(ErrorCode::BadParams, "synthetic_digits: side must be >= 4");
  ImageBatch out{side, Matrix(n, side * side)};
  const double px = 1.0 / static_cast<double>(side);
  for (std::size_t i = 0; i < n; ++i) {
    auto strokes = glyph(rng.below(10));
    const double scale = rng.uniform(0.8, 1.05);
    const double shear = rng.uniform(-0.25, 0.25);
    const double sx = rng.uniform(-0.08, 0.08), sy = rng.uniform(-0.08, 0.08);
    const double thick = rng.uniform(0.06, 0.1);
    for (auto& s : strokes)
      for (auto& p : s) {
        const double x = (p.x - 0.5) * scale, y = (p.y - 0.5) * scale;
        p = {0.5 + x - shear * y + sx, 0.5 + y + sy};
      }
    auto row = out.pixels.row(i);
    for (std::size_t r = 0; r < side; ++r)
      for (std::size_t c = 0; c < side; ++c) {
        const Pt p{(c + 0.5) * px, (r + 0.5) * px};
        double d = 1e9;
        for (const auto& s : strokes)
          for (std::size_t k = 0; k + 1 < s.size(); ++k) d = std::min(d, segment_distance(p, s[k], s[k + 1]));
        row[r * side + c] = std::clamp(1.0 - (d - 0.5 * thick) / px, 0.0, 1.0);
      }
  }
  return out;
}

void write_pgm_grid(std::ostream& os, const ImageBatch& batch, std::size_t cols) {
  if (cols == 0 || batch.size() == 0) throw Error(ErrorCode::EmptyBatch, "write_pgm_grid: nothing to draw");
  const std::size_t rows = (batch.size() + cols - 1) / cols;
  const std::size_t w = cols * (batch.side + 1) + 1, h = rows * (batch.side + 1) + 1;
  std::vector<unsigned char> img(w * h, 0);
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const std::size_t ox = (i % cols) * (batch.side + 1) + 1, oy = (i / cols) * (batch.side + 1) + 1;
    const auto px = batch.pixels.row(i);
    for (std::size_t r = 0; r < batch.side; ++r)
      for (std::size_t c = 0; c < batch.side; ++c)
        img[(oy + r) * w + ox + c] =
            static_cast<unsigned char>(std::lround(std::clamp(px[r * batch.side + c], 0.0, 1.0) * 255.0));
  }
  os << "P5\n" << w << ' ' << h << "\n255\n";
  os.write(reinterpret_cast<const char*>(img.data()), static_cast<std::streamsize>(img.size()));
}

// --- GAN ---------------------------------------------------------------------------

std::string_view to_string(GiTerm t) { return t == GiTerm::gradient ? "gradient" : "literal"; }

GiTerm parse_gi_term(std::string_view name) {
  if (name == "gradient") return GiTerm::gradient;
  if (name == "literal") return GiTerm::literal;
  throw Error(ErrorCode::Config, "unknown gi term '" + std::string(name) + "'");
}

GanBundle make_gan(std::size_t latent, std::size_t hidden, std::size_t image_dim, double gamma, GiTerm term,
                   Rng& rng) {
  if (!(gamma >= 0.0)) throw Error(ErrorCode::BadParams, "make_gan: gamma must be >= 0");
  Mlp g = Mlp::random({latent, hidden, image_dim}, OutputActivation::sigmoid, rng);
  Mlp d = Mlp::random({image_dim, hidden, 1}, OutputActivation::sigmoid, rng);
  Mlp d_grad = d;
  return GanBundle{std::move(g), std::move(d), std::move(d_grad), gamma, latent, term};
}

ImageBatch generate_images(const Mlp& g, const Matrix& latents, std::size_t side) {
  if (g.output_dim() != side * side) throw Error(ErrorCode::ShapeMismatch, "generate_images: G output is not side^2");
  ImageBatch out{side, Matrix(latents.rows(), side * side)};
  ForwardTrace t;
  for (std::size_t i = 0; i < latents.rows(); ++i) {
    trace_forward(g, latents.row(i), t);
    std::ranges::copy(t.output(), out.pixels.row(i).begin());
  }
  return out;
}

double disc_accuracy(const Mlp& d, const ImageBatch& real, const ImageBatch& fake) {
  const std::size_t total = real.size() + fake.size();
  if (total == 0) throw Error(ErrorCode::EmptyEval, "disc_accuracy: empty evaluation set");
  std::size_t correct = 0;
  ForwardTrace t;
  for (std::size_t i = 0; i < real.size(); ++i) {
    trace_forward(d, real.pixels.row(i), t);
    if (t.output()[0] >= 0.5) ++correct;
  }
  for (std::size_t i = 0; i < fake.size(); ++i) {
    trace_forward(d, fake.pixels.row(i), t);
    if (t.output()[0] < 0.5) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(total);
}

double disc_accuracy_delta(const Mlp& d_std, const Mlp& g_before, const Mlp& g_after, const EvalSet& eval) {
  if (eval.real.size() == 0 || eval.latents.rows() == 0)
    throw Error(ErrorCode::EmptyEval, "disc_accuracy_delta: empty evaluation set");
  const double before = disc_accuracy(d_std, eval.real, generate_images(g_before, eval.latents, eval.real.side));
  const double after = disc_accuracy(d_std, eval.real, generate_images(g_after, eval.latents, eval.real.side));
  return after - before;
}

namespace {

double safe_log(double p) { return std::log(std::max(p, 1e-300)); }

}  // namespace

StepMetrics gan_step(GanBundle& b, const ImageBatch& real, bool use_gi, Rng& rng, double lr_g, double lr_d,
                     const EvalSet* eval) {
  const std::size_t m = real.size();
  if (m == 0) throw Error(ErrorCode::EmptyBatch, "gan_step: empty real batch");
  const std::size_t dim = real.dim();
  if (b.g.output_dim() != dim || b.d_std.input_dim() != dim || b.g.input_dim() != b.latent)
    throw Error(ErrorCode::ShapeMismatch, "gan_step: network shapes do not match the images");
  if (eval && (eval->real.size() == 0 || eval->latents.rows() == 0))
    throw Error(ErrorCode::EmptyEval, "gan_step: empty evaluation set");
  StepMetrics out;
  const double inv_m = 1.0 / static_cast<double>(m);

  // Fakes from fresh latents.
  Matrix latents(m, b.latent);
  for (double& v : latents.data()) v = rng.normal();
  std::vector<ForwardTrace> fakes(m);
  for (std::size_t i = 0; i < m; ++i) trace_forward(b.g, latents.row(i), fakes[i]);

  // Reference taken from D_grad at the reals.
  std::vector<double> ref_grad(dim, 0.0);
  double ref_out = 0.0;
  ForwardTrace t;
  std::vector<double> dx(dim), dx_gi(dim);
  const double one[] = {1.0};
  if (use_gi) {
    for (std::size_t i = 0; i < m; ++i) {
      trace_forward(b.d_grad, real.pixels.row(i), t);
      if (b.term == GiTerm::gradient) {
        backprop(b.d_grad, t, output_logit_grad(b.d_grad, t, one), {}, dx);
        for (std::size_t p = 0; p < dim; ++p) ref_grad[p] += dx[p] * inv_m;
      } else {
        ref_out += t.output()[0] * inv_m;
      }
    }
  }

  // D_std: one BCE step, reals labelled 1 and fakes 0.
  ParamGrad gd(b.d_std.parameter_count(), 0.0);
  const double inv_2m = 0.5 * inv_m;
  double d_loss = 0.0;
  for (std::size_t i = 0; i < 2 * m; ++i) {
    const bool is_real = i < m;
    trace_forward(b.d_std, is_real ? real.pixels.row(i) : fakes[i - m].output(), t);
    const double p = t.output()[0];
    d_loss -= is_real ? safe_log(p) : safe_log(1.0 - p);
    const double seed[] = {(p - (is_real ? 1.0 : 0.0)) * inv_2m};
    backprop(b.d_std, t, seed, gd, {});
  }
  out.d_loss = d_loss * inv_2m;
  apply_update(b.d_std, gd, {}, lr_d, 1.0);

  b.d_grad = b.d_std;

  if (eval) out.acc_before = disc_accuracy(b.d_std, eval->real, generate_images(b.g, eval->latents, real.side));

  // G: non-saturating BCE through D_std, plus the GI term through D_grad.
  ParamGrad gg(b.g.parameter_count(), 0.0);
  JacobianTrace jt;
  Matrix djac(1, dim);
  double g_loss = 0.0, term = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const auto x = fakes[i].output();
    trace_forward(b.d_std, x, t);
    const double p = t.output()[0];
    g_loss -= safe_log(p);
    const double seed[] = {(p - 1.0) * inv_m};
    backprop(b.d_std, t, seed, {}, dx);
    if (use_gi) {
      if (b.term == GiTerm::gradient) {
        trace_jacobian(b.d_grad, x, jt);
        const auto j = jt.jacobian.data();
        auto dj = djac.data();
        for (std::size_t p2 = 0; p2 < dim; ++p2) {
          const double diff = j[p2] - ref_grad[p2];
          term += diff * diff * inv_m;
          dj[p2] = 2.0 * b.gamma * inv_m * diff;
        }
        jacobian_backprop(b.d_grad, jt, {}, djac, {}, dx_gi);
      } else {
        trace_forward(b.d_grad, x, t);
        const double diff = t.output()[0] - ref_out;
        term += diff * diff * inv_m;
        const double dout[] = {2.0 * b.gamma * inv_m * diff};
        backprop(b.d_grad, t, output_logit_grad(b.d_grad, t, dout), {}, dx_gi);
      }
      for (std::size_t p2 = 0; p2 < dim; ++p2) dx[p2] += dx_gi[p2];
    }
    backprop(b.g, fakes[i], output_logit_grad(b.g, fakes[i], dx), gg, {});
  }
  out.g_loss = g_loss * inv_m;
  out.grad_term = term;
  apply_update(b.g, gg, {}, lr_g, 1.0);

  if (eval) out.acc_after = disc_accuracy(b.d_std, eval->real, generate_images(b.g, eval->latents, real.side));
  return out;
}

KlStats kl_image_quality(const ImageBatch& generated, const ImageBatch& real, std::size_t bins, double eps) {
  if (generated.size() == 0 || real.size() == 0) throw Error(ErrorCode::EmptyBatch, "kl_image_quality: empty batch");
  if (bins == 0 || !(eps > 0.0)) throw Error(ErrorCode::BadParams, "kl_image_quality: need bins >= 1 and eps > 0");
  auto bin_of = [&](double v) {
    return std::min(bins - 1, static_cast<std::size_t>(std::clamp(v, 0.0, 1.0) * static_cast<double>(bins)));
  };
  auto normalise = [&](std::vector<double>& h) {
    double s = 0.0;
    for (double& v : h) s += (v += eps);
    for (double& v : h) v /= s;
  };
  std::vector<double> q(bins, 0.0);
  for (double v : real.pixels.data()) q[bin_of(v)] += 1.0;
  normalise(q);

  std::vector<double> kl(generated.size());
  std::vector<double> h(bins);
  for (std::size_t i = 0; i < generated.size(); ++i) {
    std::ranges::fill(h, 0.0);
    for (double v : generated.pixels.row(i)) h[bin_of(v)] += 1.0;
    normalise(h);
    double s = 0.0;
    for (std::size_t k = 0; k < bins; ++k) s += h[k] * std::log(h[k] / q[k]);
    kl[i] = s;
  }
  KlStats st;
  for (double v : kl) st.mean += v;
  st.mean /= static_cast<double>(kl.size());
  for (double v : kl) st.std += (v - st.mean) * (v - st.mean);
  st.std = std::sqrt(st.std / static_cast<double>(kl.size()));
  return st;
}

void GanConfig::validate() const {
  if (latent == 0 || hidden == 0) throw Error(ErrorCode::BadWidth, "gan: latent and hidden must be >= 1");
  if (batch_size == 0) throw Error(ErrorCode::BadParams, "gan: batch_size must be >= 1");
  if (!(lr_g > 0.0) || !(lr_d > 0.0)) throw Error(ErrorCode::BadParams, "gan: learning rates must be > 0");
  if (!(gamma >= 0.0)) throw Error(ErrorCode::BadParams, "gan: gamma must be >= 0");
  if (eval_size == 0 || kl_samples == 0) throw Error(ErrorCode::BadParams, "gan: eval_size and kl_samples must be >= 1");
  if (rolling_window == 0) throw Error(ErrorCode::BadParams, "gan: rolling_window must be >= 1");
  if (kl_bins == 0 || !(kl_eps > 0.0)) throw Error(ErrorCode::BadParams, "gan: bad KL settings");
}

GanRun train_gan(const GanConfig& cfg, const ImageBatch& real, bool use_gi) {
  cfg.validate();
  if (real.size() == 0) throw Error(ErrorCode::EmptyBatch, "train_gan: no real images");
  real.validate();
  Rng init_rng = Rng::derive(cfg.seed, 1);
  Rng step_rng = Rng::derive(cfg.seed, 2);
  Rng eval_rng = Rng::derive(cfg.seed, 3);
  Rng kl_rng = Rng::derive(cfg.seed, 4);

  GanRun run{make_gan(cfg.latent, cfg.hidden, real.dim(), cfg.gamma, cfg.term, init_rng), {}, {}, {}, {}};

  std::vector<std::size_t> eval_idx(cfg.eval_size);
  for (auto& i : eval_idx) i = eval_rng.below(real.size());
  EvalSet eval{real.select(eval_idx), Matrix(cfg.eval_size, cfg.latent)};
  Matrix kl_latents(cfg.kl_samples, cfg.latent);
  for (double& v : kl_latents.data()) v = kl_rng.normal();
  run.kl_initial = kl_image_quality(generate_images(run.bundle.g, kl_latents, real.side), real, cfg.kl_bins, cfg.kl_eps);

  std::vector<std::size_t> idx(cfg.batch_size);
  double window_sum = 0.0;
  for (std::size_t it = 0; it < cfg.iterations; ++it) {
    for (auto& i : idx) i = step_rng.below(real.size());
    for (double& v : eval.latents.data()) v = eval_rng.normal();
    const auto s = gan_step(run.bundle, real.select(idx), use_gi, step_rng, cfg.lr_g, cfg.lr_d, &eval);
    GanIteration rec;
    rec.iteration = it + 1;
    rec.acc_delta = s.acc_delta();
    rec.g_loss = s.g_loss;
    rec.d_loss = s.d_loss;
    rec.grad_term = s.grad_term;
    window_sum += rec.acc_delta;
    if (it >= cfg.rolling_window) window_sum -= run.metrics[it - cfg.rolling_window].acc_delta;
    rec.rolling_mean = window_sum / static_cast<double>(std::min(it + 1, cfg.rolling_window));
    run.metrics.push_back(rec);
  }

  const ImageBatch final_images = generate_images(run.bundle.g, kl_latents, real.side);
  run.kl_final = kl_image_quality(final_images, real, cfg.kl_bins, cfg.kl_eps);
  std::vector<std::size_t> first(std::min<std::size_t>(16, cfg.kl_samples));
  std::iota(first.begin(), first.end(), std::size_t{0});
  run.samples = final_images.select(first);
  return run;
}

void write_gan_metrics_csv(std::ostream& os, const std::vector<GanIteration>& metrics) {
  os << "iteration,acc_delta,rolling_mean,g_loss,d_loss,grad_term\n";
  for (const auto& r : metrics)
    os << r.iteration << ',' << csv::format(r.acc_delta) << ',' << csv::format(r.rolling_mean) << ','
       << csv::format(r.g_loss) << ',' << csv::format(r.d_loss) << ',' << csv::format(r.grad_term) << '\n';
}

}  // namespace gradlore
