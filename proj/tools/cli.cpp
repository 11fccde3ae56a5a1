#include "cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <mutex>
#include <optional>
#include <sstream>
#include <thread>

#include "ddp/imaging.hpp"
#include "ddp/metrics.hpp"
#include "ddp/phantom.hpp"
#include "ddp/recon.hpp"
#include "ddp/report.hpp"
#include "ddp/sampling.hpp"
#include "ddp/tensor.hpp"
#include "ddp/vae.hpp"

namespace fs = std::filesystem;

namespace ddp::cli {
namespace {

struct MissingInput : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct TrainingDiverged : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::uint64_t default_seed() {
  if (const char* s = std::getenv("DDP_SEED")) {
    try {
      return std::stoull(s);
    } catch (const std::exception&) {
      throw InvalidArgument(std::string("DDP_SEED is not an unsigned integer: ") + s);
    }
  }
  return 0;
}

TensorFile read_container(const fs::path& path) {
  if (!fs::exists(path)) throw MissingInput("no such file: " + path.string());
  return tensor_io_read(path);
}

void ensure_parent(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
}

void write_text(const fs::path& path, const std::string& text) {
  ensure_parent(path);
  write_file_atomic(path, text);
}

void write_container(const fs::path& path, const TensorFile& f) {
  ensure_parent(path);
  tensor_io_write(path, f);
}

/// Complex image from a phantom ("magnitude"/"phase") or image ("image") container.
ComplexImage load_image(const TensorFile& f) {
  if (const Tensor* t = f.find("image")) return to_complex_image(*t);
  return phantom_from_file(f).complex_image();
}

TensorFile image_to_file(const ComplexImage& img, nlohmann::json meta) {
  TensorFile f;
  f.meta = std::move(meta);
  f.meta["kind"] = "image";
  f.add("image", to_tensor(img));
  return f;
}

// ---------------------------------------------------------------------------
// Shared option groups

struct ArchOptions {
  int patch = VaeArch::desk().patch;
  int latent = VaeArch::desk().latent;
  std::vector<int> encoder = VaeArch::desk().encoder_channels;
  std::vector<int> decoder = VaeArch::desk().decoder_channels;

  void add(CLI::App& app) {
    app.add_option("--patch", patch, "Patch side p");
    app.add_option("--latent", latent, "Latent dimension L");
    app.add_option("--enc-channels", encoder, "Encoder conv channels")->delimiter(',');
    app.add_option("--dec-channels", decoder, "Decoder channels (dense maps, then convs)")->delimiter(',');
  }
  VaeArch arch() const { return {patch, latent, encoder, decoder}; }
};

struct TrainOptions {
  TrainConfig cfg = TrainConfig::desk();
  int count = 2000;
  double noise = 0.0;
  double anywhere = 0.0;

  void add(CLI::App& app) {
    app.add_option("--iterations", cfg.iterations, "Training iterations");
    app.add_option("--batch", cfg.batch_size, "Batch size");
    app.add_option("--lr", cfg.learning_rate, "Adam learning rate");
    app.add_option("--init-std", cfg.init_std, "Weight initialisation std");
    app.add_option("--count", count, "Training patches to extract from phantoms");
    app.add_option("--anywhere", anywhere, "Share of patches drawn without the tissue-centre constraint");
    app.add_option("--noise", noise, "Gaussian noise std added to the normalised training patches");
  }
};

struct ReconOptions {
  ReconConfig cfg;
  int T = 0;  // 0: 30 for R <= 3, else 60

  void add(CLI::App& app) {
    app.add_option("--T", T, "POCS iterations (0 picks 30 for R <= 3, 60 above)");
    app.add_option("--K", cfg.K, "Prior ascent steps per iteration");
    app.add_option("--alpha", cfg.alpha, "Prior step size");
    app.add_option("--J", cfg.J, "Monte-Carlo samples per patch");
    app.add_flag("--phase", cfg.phase_projection, "Enable the smooth-phase projection");
    app.add_flag("--freeze-samples", cfg.freeze_samples, "Fix the latent noise within each prior projection");
    app.add_option("--warmup", cfg.warmup_dc_iters, "Data-only warm-up iterations (multi-coil)");
    app.add_option("--cg-iters", cfg.cg_iters, "CG iterations per data projection (non-Cartesian)");
  }

  ReconConfig resolve(double ratio, std::uint64_t seed) const {
    ReconConfig c = cfg;
    c.T = T > 0 ? T : (ratio <= 3.0 + 1e-9 ? 30 : 60);
    c.seed = seed;
    return c;
  }
};

double acceleration(const EncodingOperator& op) {
  const double full = static_cast<double>(op.height()) * op.width();
  return full / static_cast<double>(op.sample_count());
}

// ---------------------------------------------------------------------------
// Pipeline pieces shared by the commands and the sweep

std::vector<Phantom> make_phantoms(int n, int height, int width, std::uint64_t seed, std::uint64_t stream_base) {
  std::vector<Phantom> out;
  for (int i = 0; i < n; ++i) {
    Rng rng(seed, stream_base + static_cast<std::uint64_t>(i));
    out.push_back(gen_phantom(height, width, rng));
  }
  return out;
}

VaeModel train_model(const PatchSet& set, const VaeArch& arch, TrainConfig cfg, std::uint64_t seed,
                     std::vector<double>* losses, const fs::path& checkpoint) {
  if (set.patch != arch.patch) throw InvalidArgument("patch set size differs from --patch");
  Rng init = Rng(seed).fork(11);
  VaeModel model = VaeModel::initialize(arch, init, cfg.init_std);
  cfg.seed = seed;
  try {
    train_vae(model, set.patches, cfg, [&](int, double loss) {
      if (losses) losses->push_back(loss);
    });
  } catch (const NonFiniteError& e) {
    // train_step leaves the model at its last finite state.
    if (!checkpoint.empty()) write_container(checkpoint, checkpoint_to_file(model));
    throw TrainingDiverged(e.what());
  }
  return model;
}

Acquisition simulate(const Phantom& ph, const std::variant<CartesianMask, RadialTrajectory>& sampling, int coils,
                     double sigma, std::uint64_t seed) {
  const int h = static_cast<int>(ph.magnitude.rows()), w = static_cast<int>(ph.magnitude.cols());
  Rng map_rng = Rng(seed).fork(20);
  Rng noise_rng = Rng(seed).fork(21);
  auto maps = simulate_coil_maps(h, w, coils, map_rng);
  EncodingOperator op = std::holds_alternative<CartesianMask>(sampling)
                            ? EncodingOperator::cartesian(std::get<CartesianMask>(sampling), std::move(maps), sigma)
                            : EncodingOperator::nonuniform(std::get<RadialTrajectory>(sampling), h, w, std::move(maps),
                                                           sigma);
  KSpaceData y = add_noise(op.apply(ph.complex_image()), sigma, noise_rng);
  return {std::move(op), std::move(y)};
}

double sigma_for_snr(const Phantom& ph, double snr) {
  if (snr <= 0.0) return 0.0;
  double sum = 0.0;
  Eigen::Index n = 0;
  for (Eigen::Index i = 0; i < ph.labels.size(); ++i)
    if (ph.labels.data()[i] != kBackground) {
      sum += ph.magnitude.data()[i];
      ++n;
    }
  return n > 0 ? sum / static_cast<double>(n) / snr : 0.0;
}

struct Metrics {
  double rmse = std::numeric_limits<double>::quiet_NaN();
  double cnr = std::numeric_limits<double>::quiet_NaN();
  double cn = std::numeric_limits<double>::quiet_NaN();
};

Metrics evaluate_image(const ComplexImage& gt, const ComplexImage& rec, const std::optional<SegMasks>& masks) {
  Metrics m;
  const BoolImage* eval = masks && masks->eval ? &*masks->eval : nullptr;
  m.rmse = rmse(gt, rec, eval);
  if (masks) {
    m.cnr = cnr(rec, *masks);
    m.cn = cn(rec, *masks);
  }
  return m;
}

std::optional<SegMasks> load_masks(const TensorFile& f) {
  if (const Tensor* labels = f.find("labels")) return seg_masks_from_labels(to_label_image(*labels));
  SegMasks m;
  m.gm = to_bool_image(f.at("gm"));
  m.wm = to_bool_image(f.at("wm"));
  if (const Tensor* e = f.find("eval")) m.eval = to_bool_image(*e);
  if (m.gm.rows() != m.wm.rows() || m.gm.cols() != m.wm.cols()) throw ShapeError("GM and WM masks differ in size");
  if ((m.gm && m.wm).any()) throw InvalidArgument("GM and WM masks overlap");
  return m;
}

std::vector<fs::path> list_containers(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw MissingInput("no such directory: " + dir.string());
  std::vector<fs::path> out;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.is_regular_file() && e.path().extension() == ".ddpt") out.push_back(e.path());
  std::sort(out.begin(), out.end());
  return out;
}

/// Runs fn(i) for i in [0, n) on up to `jobs` threads.
void parallel_for(int n, int jobs, const std::function<void(int)>& fn) {
  jobs = std::clamp(jobs, 1, std::max(n, 1));
  if (jobs == 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  for (int t = 0; t < jobs; ++t)
    pool.emplace_back([&] {
      for (int i = next++; i < n; i = next++) fn(i);
    });
  for (auto& th : pool) th.join();
}

// ---------------------------------------------------------------------------
// Commands

int cmd_phantom_gen(int n, int first, int height, int width, const fs::path& out, std::uint64_t seed) {
  if (n < 0) throw InvalidArgument("--n must be >= 0");
  if (first < 0) throw InvalidArgument("--first must be >= 0");
  if (n == 0) return 0;
  fs::create_directories(out);
  const auto phantoms = make_phantoms(n, height, width, seed, static_cast<std::uint64_t>(first));
  for (int i = 0; i < n; ++i) {
    std::ostringstream name;
    name << "phantom_" << std::setw(3) << std::setfill('0') << first + i;
    write_container(out / (name.str() + ".ddpt"), phantom_to_file(phantoms[i]));
    write_text(out / (name.str() + ".pgm"), pgm_magnitude(phantoms[i].complex_image()));
  }
  return 0;
}

int cmd_train_prior(const std::string& phantom_dir, const std::string& patch_file, const ArchOptions& arch_opts,
                    const TrainOptions& train, const fs::path& out, std::string loss_csv,
                    const std::string& save_patches, std::uint64_t seed) {
  const VaeArch arch = arch_opts.arch();
  arch.validate();
  PatchSet set;
  if (!patch_file.empty()) {
    set = patchset_from_file(read_container(patch_file));
  } else if (!phantom_dir.empty()) {
    std::vector<Phantom> phantoms;
    for (const auto& p : list_containers(phantom_dir)) phantoms.push_back(phantom_from_file(read_container(p)));
    if (phantoms.empty()) throw MissingInput("no .ddpt phantoms in " + phantom_dir);
    Rng rng = Rng(seed).fork(10);
    set = extract_training_patches(phantoms, arch.patch, train.count, rng, train.anywhere);
  } else {
    throw InvalidArgument("need --phantoms or --patches");
  }
  Rng noise_rng = Rng(seed).fork(12);
  add_training_noise(set, train.noise, noise_rng);
  if (!save_patches.empty()) write_container(save_patches, patchset_to_file(set));

  if (loss_csv.empty()) loss_csv = out.string() + ".loss.csv";
  std::vector<double> losses;
  auto write_losses = [&] {
    CsvTable t({"iter", "loss"});
    for (std::size_t i = 0; i < losses.size(); ++i) t.add_row({std::to_string(i), format_double(losses[i])});
    write_text(loss_csv, t.str());
  };
  try {
    const VaeModel model = train_model(set, arch, train.cfg, seed, &losses, out);
    write_losses();
    write_container(out, checkpoint_to_file(model));
  } catch (const TrainingDiverged& e) {
    write_losses();
    std::cerr << "error: " << e.what() << "; kept the last finite checkpoint at " << out << "\n";
    return kExitTrainingDiverged;
  }
  return 0;
}

int cmd_gen_mask(const std::string& kind, int height, int width, double ratio, int candidates, const fs::path& out,
                 const std::string& pgm, std::uint64_t seed) {
  TensorFile f;
  f.meta["ratio"] = ratio;
  f.meta["seed"] = seed;
  f.meta["height"] = height;
  f.meta["width"] = width;
  if (kind == "cartesian") {
    CartesianMaskOptions opts;
    opts.ratio = ratio;
    opts.n_candidates = candidates;
    Rng rng(seed);
    const CartesianMask mask = gen_cartesian_mask(height, width, opts, rng);
    f.meta["kind"] = "cartesian_mask";
    f.meta["peak_to_side"] = peak_to_side_ratio(mask);
    f.add("mask", to_tensor(mask_image(mask)));
    if (!pgm.empty()) {
      const RealImage img = mask_image(mask);
      std::vector<std::uint8_t> px(img.size());
      for (Eigen::Index i = 0; i < img.size(); ++i) px[i] = img.data()[i] > 0 ? 255 : 0;
      write_text(pgm, encode_pgm(px, height, width));
    }
  } else if (kind == "radial") {
    if (height != width) throw InvalidArgument("radial trajectories need a square image");
    const RadialTrajectory t = gen_radial_trajectory(width, ratio);
    f.meta["kind"] = "radial_trajectory";
    f.meta["spokes"] = t.spokes;
    f.meta["samples_per_spoke"] = t.samples_per_spoke;
    std::vector<double> pts;
    for (const auto& p : t.points) {
      pts.push_back(p.kx);
      pts.push_back(p.ky);
    }
    f.add("trajectory", Tensor({t.points.size(), 2}, std::move(pts)));
  } else {
    throw InvalidArgument("--kind must be cartesian or radial");
  }
  write_container(out, f);
  return 0;
}

std::variant<CartesianMask, RadialTrajectory> load_sampling(const TensorFile& f) {
  if (const Tensor* m = f.find("mask")) {
    CartesianMask mask = mask_from_image(to_real_image(*m));
    mask.ratio = f.meta.value("ratio", mask.ratio);
    mask.seed = f.meta.value("seed", std::uint64_t{0});
    return mask;
  }
  const Tensor& t = f.at("trajectory");
  if (t.shape().size() != 2 || t.shape()[1] != 2) throw ShapeError("trajectory must be [M, 2]");
  RadialTrajectory traj;
  traj.spokes = f.meta.value("spokes", 0);
  traj.samples_per_spoke = f.meta.value("samples_per_spoke", 0);
  const auto pts = t.as_real();
  for (std::size_t i = 0; i + 1 < pts.size(); i += 2) traj.points.push_back({pts[i], pts[i + 1]});
  return traj;
}

int cmd_undersample(const fs::path& phantom_path, const fs::path& mask_path, int coils, double sigma, double snr,
                    const fs::path& out, std::uint64_t seed) {
  const Phantom ph = phantom_from_file(read_container(phantom_path));
  const auto sampling = load_sampling(read_container(mask_path));
  if (snr > 0.0) sigma = sigma_for_snr(ph, snr);
  write_container(out, acquisition_to_file(simulate(ph, sampling, coils, sigma, seed)));
  return 0;
}

int cmd_reconstruct(const fs::path& kspace, const std::string& checkpoint, bool sense, const ReconOptions& ro,
                    const fs::path& out, const std::string& ground_truth, const std::string& pgm_prefix,
                    std::string trace_csv, std::uint64_t seed) {
  // Resolve every input before computing or writing anything.
  if (!sense && checkpoint.empty()) throw InvalidArgument("need --checkpoint or --sense");
  if (!sense && !fs::exists(checkpoint)) throw MissingInput("no such checkpoint: " + checkpoint);
  const Acquisition acq = acquisition_from_file(read_container(kspace));
  std::optional<VaeModel> model;
  if (!sense) model = checkpoint_load(checkpoint);
  std::optional<ComplexImage> gt;
  if (!ground_truth.empty()) gt = load_image(read_container(ground_truth));

  const ReconConfig cfg = ro.resolve(acceleration(acq.op), seed);
  const ReconResult res =
      sense ? sense_recon(acq.data, acq.op, cfg, gt ? &*gt : nullptr)
            : ddp_recon(acq.data, acq.op, model ? &*model : nullptr, cfg, gt ? &*gt : nullptr);

  nlohmann::json meta{{"T", cfg.T}, {"K", cfg.K}, {"alpha", cfg.alpha}, {"J", cfg.J},
                      {"phase_projection", cfg.phase_projection}, {"seed", seed}, {"method", sense ? "sense" : "ddp"}};
  write_container(out, image_to_file(res.image, meta));
  if (trace_csv.empty()) trace_csv = out.string() + ".trace.csv";
  write_text(trace_csv, res.trace.to_csv());
  if (!pgm_prefix.empty()) {
    write_text(pgm_prefix + "_mag.pgm", pgm_magnitude(res.image));
    write_text(pgm_prefix + "_phase.pgm", pgm_phase(res.image));
    if (gt) {
      const RealImage ref = gt->abs();
      const double scale = percentile_nearest_rank(ref, 99.0);
      const RealImage err = (res.image.abs() - ref) / (scale > 0 ? scale : 1.0);
      write_text(pgm_prefix + "_err.pgm", pgm_signed(err, 0.3));
    }
  }
  return 0;
}

const std::vector<std::string> kEvalHeader{"id", "R", "rmse", "cnr", "cn"};

void append_csv_row(const fs::path& path, const std::vector<std::string>& header,
                    const std::vector<std::string>& cells) {
  ensure_parent(path);
  const bool fresh = !fs::exists(path) || fs::file_size(path) == 0;
  std::ofstream os(path, std::ios::app | std::ios::binary);
  if (!os) throw IoError("cannot open " + path.string() + " for appending");
  if (fresh) os << CsvTable::header_line(header);
  os << CsvTable::format_row(cells);
  if (!os) throw IoError("failed writing " + path.string());
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream is(line);
  while (std::getline(is, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

std::string mean_std(const std::vector<double>& v) {
  if (v.empty()) return "";
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  std::ostringstream os;
  os << std::fixed << std::setprecision(2) << mean << "(" << std::sqrt(ss / static_cast<double>(v.size())) << ")";
  return os.str();
}

int cmd_evaluate_aggregate(const fs::path& csv) {
  std::ifstream is(csv);
  if (!is) throw MissingInput("no such file: " + csv.string());
  std::string line;
  if (!std::getline(is, line)) throw FormatError("empty metrics CSV");
  const auto header = split_csv_line(line);
  auto col = [&](const std::string& name) {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw FormatError("metrics CSV lacks column " + name);
    return static_cast<std::size_t>(it - header.begin());
  };
  const std::size_t c_r = col("R");
  const std::vector<std::pair<std::string, std::size_t>> metrics{{"rmse", col("rmse")}, {"cnr", col("cnr")},
                                                                  {"cn", col("cn")}};
  std::map<std::string, std::map<std::string, std::vector<double>>> groups;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto cells = split_csv_line(line);
    for (const auto& [name, idx] : metrics)
      if (idx < cells.size() && !cells[idx].empty()) groups[cells.at(c_r)][name].push_back(std::stod(cells[idx]));
  }
  CsvTable t({"R", "n", "rmse", "cnr", "cn"});
  for (const auto& [r, g] : groups) {
    std::size_t n = 0;
    for (const auto& [name, v] : g) n = std::max(n, v.size());
    auto get = [&](const std::string& k) { return g.count(k) ? mean_std(g.at(k)) : std::string(); };
    t.add_row({r, std::to_string(n), get("rmse"), get("cnr"), get("cn")});
  }
  std::cout << t.str();
  return 0;
}

int cmd_evaluate(const fs::path& gt_path, const fs::path& rec_path, const std::string& masks_path,
                 const std::string& id, const std::string& ratio, const std::string& csv) {
  const ComplexImage gt = load_image(read_container(gt_path));
  const ComplexImage rec = load_image(read_container(rec_path));
  std::optional<SegMasks> masks;
  if (!masks_path.empty()) masks = load_masks(read_container(masks_path));
  const Metrics m = evaluate_image(gt, rec, masks);
  const std::vector<std::string> row{id.empty() ? rec_path.stem().string() : id, ratio, format_double(m.rmse),
                                     format_double(m.cnr), format_double(m.cn)};
  if (!csv.empty()) append_csv_row(csv, kEvalHeader, row);
  std::cout << CsvTable::header_line(kEvalHeader) << CsvTable::format_row(row);
  return 0;
}

struct SweepOptions {
  std::vector<int> patches{16};
  std::vector<int> latents{16};
  std::vector<double> ratios{2.0};
  std::vector<double> snrs{0.0};
  int train_phantoms = 8;
  int test_phantoms = 1;
  int height = 64;
  int width = 64;
  int coils = 1;
  int jobs = 1;
  int candidates = 1000;
};

int cmd_sweep(const SweepOptions& so, const ArchOptions& arch_opts, const TrainOptions& train, const ReconOptions& ro,
              const fs::path& out, std::uint64_t seed) {
  const auto train_set = make_phantoms(so.train_phantoms, so.height, so.width, seed, 1000);
  const auto test_set = make_phantoms(so.test_phantoms, so.height, so.width, seed, 0);

  struct ModelCell {
    int patch, latent;
    std::optional<VaeModel> model;
    std::string error;
  };
  std::vector<ModelCell> models;
  for (int p : so.patches)
    for (int l : so.latents) models.push_back({p, l, std::nullopt, ""});
  parallel_for(static_cast<int>(models.size()), so.jobs, [&](int i) {
    auto& mc = models[i];
    try {
      VaeArch arch = arch_opts.arch();
      arch.patch = mc.patch;
      arch.latent = mc.latent;
      Rng rng = Rng(seed).fork(10);
      PatchSet set = extract_training_patches(train_set, mc.patch, train.count, rng, train.anywhere);
      Rng noise_rng = Rng(seed).fork(12);
      add_training_noise(set, train.noise, noise_rng);
      mc.model = train_model(set, arch, train.cfg, seed, nullptr, {});
    } catch (const std::exception& e) {
      mc.error = e.what();
    }
  });

  struct Cell {
    std::size_t model;
    double ratio, snr;
    std::vector<std::string> row;
    bool failed = false;
  };
  std::vector<Cell> cells;
  for (std::size_t mi = 0; mi < models.size(); ++mi)
    for (double r : so.ratios)
      for (double s : so.snrs) cells.push_back({mi, r, s, {}, false});

  parallel_for(static_cast<int>(cells.size()), so.jobs, [&](int i) {
    auto& c = cells[i];
    const auto& mc = models[c.model];
    std::vector<double> rmses, cnrs, cns, sigmas;
    std::string status = "ok";
    try {
      if (!mc.model) throw Error("training failed: " + mc.error);
      CartesianMaskOptions mopts;
      mopts.ratio = c.ratio;
      mopts.n_candidates = so.candidates;
      Rng mask_rng(seed);
      const CartesianMask mask = gen_cartesian_mask(so.height, so.width, mopts, mask_rng);
      for (std::size_t k = 0; k < test_set.size(); ++k) {
        const Phantom& ph = test_set[k];
        const double sigma = sigma_for_snr(ph, c.snr);
        const Acquisition acq = simulate(ph, mask, so.coils, sigma, seed + k);
        const ComplexImage gt = ph.complex_image();
        const ReconResult res = ddp_recon(acq.data, acq.op, &*mc.model, ro.resolve(c.ratio, seed), &gt);
        const Metrics m = evaluate_image(gt, res.image, seg_masks_from_labels(ph.labels));
        rmses.push_back(m.rmse);
        cnrs.push_back(m.cnr);
        cns.push_back(m.cn);
        sigmas.push_back(sigma);
      }
    } catch (const std::exception& e) {
      c.failed = true;
      status = std::string("failed: ") + e.what();
      std::replace(status.begin(), status.end(), ',', ';');
    }
    auto mean = [](const std::vector<double>& v) {
      if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
      double s = 0.0;
      for (double x : v) s += x;
      return s / static_cast<double>(v.size());
    };
    c.row = {std::to_string(mc.patch), std::to_string(mc.latent), format_double(c.ratio), format_double(c.snr),
             format_double(mean(sigmas)), format_double(mean(rmses)), format_double(mean(cnrs)),
             format_double(mean(cns)), status};
  });

  CsvTable t({"patch", "latent", "R", "snr", "sigma", "rmse", "cnr", "cn", "status"});
  bool any_failed = false;
  for (auto& c : cells) {
    t.add_row(c.row);
    any_failed = any_failed || c.failed;
  }
  write_text(out, t.str());
  if (any_failed) {
    std::cerr << "error: some sweep cells failed; see the status column of " << out << "\n";
    return kExitSweepFailures;
  }
  return 0;
}

}  // namespace

int run(const std::vector<std::string>& args) {
  CLI::App app{"Deep density prior MRI reconstruction toolkit", "ddp"};
  app.require_subcommand(1);
  std::uint64_t seed = 0;
  std::function<int()> action;

  try {
    seed = default_seed();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  auto add_seed = [&](CLI::App* sub) { sub->add_option("--seed", seed, "RNG seed (default $DDP_SEED or 0)"); };

  // phantom-gen
  int n_phantoms = 1, first_phantom = 0, height = 64, width = 64;
  std::string out_dir;
  auto* pg = app.add_subcommand("phantom-gen", "Write synthetic brain phantoms and PGM previews");
  pg->add_option("--n", n_phantoms, "Number of phantoms");
  pg->add_option("--first", first_phantom, "Index of the first phantom (its RNG stream)");
  pg->add_option("--height", height, "Image rows");
  pg->add_option("--width", width, "Image columns");
  pg->add_option("--out", out_dir, "Output directory")->required();
  add_seed(pg);
  pg->callback([&] { action = [&] { return cmd_phantom_gen(n_phantoms, first_phantom, height, width, out_dir, seed); }; });

  // train-prior
  ArchOptions arch;
  TrainOptions train;
  std::string phantom_dir, patch_file, ckpt_out, loss_csv, save_patches, preset;
  auto* tp = app.add_subcommand("train-prior", "Train the VAE patch prior");
  auto* src = tp->add_option_group("source");
  src->add_option("--phantoms", phantom_dir, "Directory of phantom containers");
  src->add_option("--patches", patch_file, "Patch-set container");
  src->require_option(1);
  tp->add_option("--preset", preset, "desk or paper defaults (applied before other flags)")
      ->check(CLI::IsMember({"desk", "paper"}));
  arch.add(*tp);
  train.add(*tp);
  tp->add_option("--out", ckpt_out, "Checkpoint path")->required();
  tp->add_option("--loss-csv", loss_csv, "Loss CSV (default <out>.loss.csv)");
  tp->add_option("--save-patches", save_patches, "Also write the extracted patch set");
  add_seed(tp);
  tp->callback([&] {
    if (preset == "paper") {
      // Only fill values the user did not set explicitly.
      const VaeArch pa = VaeArch::paper();
      const TrainConfig pt = TrainConfig::paper();
      if (tp->count("--patch") == 0) arch.patch = pa.patch;
      if (tp->count("--latent") == 0) arch.latent = pa.latent;
      if (tp->count("--batch") == 0) train.cfg.batch_size = pt.batch_size;
      if (tp->count("--iterations") == 0) train.cfg.iterations = pt.iterations;
    }
    action = [&] {
      return cmd_train_prior(phantom_dir, patch_file, arch, train, ckpt_out, loss_csv, save_patches, seed);
    };
  });

  // gen-mask
  std::string mask_kind = "cartesian", mask_out, mask_pgm;
  double ratio = 2.0;
  int candidates = 1000, mh = 64, mw = 64;
  auto* gm = app.add_subcommand("gen-mask", "Generate a Cartesian mask or radial trajectory");
  gm->add_option("--kind", mask_kind, "cartesian or radial");
  gm->add_option("--height", mh, "Image rows");
  gm->add_option("--width", mw, "Image columns");
  gm->add_option("--R", ratio, "Undersampling ratio");
  gm->add_option("--candidates", candidates, "Candidate masks drawn per selection");
  gm->add_option("--out", mask_out, "Output container")->required();
  gm->add_option("--pgm", mask_pgm, "Optional PGM preview");
  add_seed(gm);
  gm->callback([&] {
    action = [&] { return cmd_gen_mask(mask_kind, mh, mw, ratio, candidates, mask_out, mask_pgm, seed); };
  });

  // undersample
  std::string us_phantom, us_mask, us_out;
  int coils = 1;
  double sigma = 0.0, snr = 0.0;
  auto* us = app.add_subcommand("undersample", "Simulate (noisy, multi-coil) undersampled k-space");
  us->add_option("--phantom", us_phantom, "Phantom container")->required();
  us->add_option("--mask", us_mask, "Mask or trajectory container")->required();
  us->add_option("--coils", coils, "Number of simulated coils");
  auto* sig = us->add_option("--sigma", sigma, "Noise std per real/imaginary part");
  us->add_option("--snr", snr, "Mean tissue magnitude over noise std (overrides --sigma)")->excludes(sig);
  us->add_option("--out", us_out, "Acquisition container")->required();
  add_seed(us);
  us->callback([&] { action = [&] { return cmd_undersample(us_phantom, us_mask, coils, sigma, snr, us_out, seed); }; });

  // reconstruct
  ReconOptions recon;
  std::string rc_kspace, rc_ckpt, rc_out, rc_gt, rc_pgm, rc_trace;
  bool rc_sense = false;
  auto* rc = app.add_subcommand("reconstruct", "POCS reconstruction with the learned prior");
  rc->add_option("--kspace", rc_kspace, "Acquisition container")->required();
  rc->add_option("--checkpoint", rc_ckpt, "VAE checkpoint");
  rc->add_flag("--sense", rc_sense, "Data projections only (no prior)");
  recon.add(*rc);
  rc->add_option("--out", rc_out, "Reconstructed image container")->required();
  rc->add_option("--ground-truth", rc_gt, "Phantom or image container for RMSE traces and error maps");
  rc->add_option("--pgm-prefix", rc_pgm, "Write <prefix>_mag/_phase/_err.pgm previews");
  rc->add_option("--trace", rc_trace, "Trace CSV (default <out>.trace.csv)");
  add_seed(rc);
  rc->callback([&] {
    action = [&] {
      return cmd_reconstruct(rc_kspace, rc_ckpt, rc_sense, recon, rc_out, rc_gt, rc_pgm, rc_trace, seed);
    };
  });

  // evaluate
  std::string ev_gt, ev_rec, ev_masks, ev_id, ev_r, ev_csv, ev_agg;
  auto* ev = app.add_subcommand("evaluate", "Compute RMSE/CNR/CN or aggregate a metrics CSV");
  ev->add_option("--gt", ev_gt, "Ground-truth container");
  ev->add_option("--rec", ev_rec, "Reconstruction container");
  ev->add_option("--masks", ev_masks, "Mask container (gm/wm[/eval]) or phantom with labels");
  ev->add_option("--id", ev_id, "Row identifier (default: reconstruction file stem)");
  ev->add_option("--R", ev_r, "Undersampling ratio recorded in the row");
  ev->add_option("--csv", ev_csv, "Append the row to this CSV");
  ev->add_option("--aggregate", ev_agg, "Print mean(std) per R of an existing metrics CSV");
  ev->callback([&] {
    action = [&] {
      if (!ev_agg.empty()) return cmd_evaluate_aggregate(ev_agg);
      if (ev_gt.empty() || ev_rec.empty()) throw InvalidArgument("need --gt and --rec (or --aggregate)");
      return cmd_evaluate(ev_gt, ev_rec, ev_masks, ev_id, ev_r, ev_csv);
    };
  });

  // sweep
  SweepOptions so;
  ArchOptions sweep_arch;
  TrainOptions sweep_train;
  ReconOptions sweep_recon;
  std::string sw_out;
  auto* sw = app.add_subcommand("sweep", "Cross-product sweep over patch size, latent size, R and SNR");
  sw->add_option("--patch", so.patches, "Patch sizes")->delimiter(',');
  sw->add_option("--latent", so.latents, "Latent sizes")->delimiter(',');
  sw->add_option("--R", so.ratios, "Undersampling ratios")->delimiter(',');
  sw->add_option("--snr", so.snrs, "SNR levels (0 = noiseless)")->delimiter(',');
  sw->add_option("--enc-channels", sweep_arch.encoder, "Encoder conv channels")->delimiter(',');
  sw->add_option("--dec-channels", sweep_arch.decoder, "Decoder channels")->delimiter(',');
  sweep_train.add(*sw);
  sweep_recon.add(*sw);
  sw->add_option("--train-phantoms", so.train_phantoms, "Phantoms used for training");
  sw->add_option("--test-phantoms", so.test_phantoms, "Held-out phantoms per cell");
  sw->add_option("--height", so.height, "Image rows");
  sw->add_option("--width", so.width, "Image columns");
  sw->add_option("--coils", so.coils, "Simulated coils");
  sw->add_option("--candidates", so.candidates, "Mask candidates");
  sw->add_option("--jobs", so.jobs, "Parallel jobs");
  sw->add_option("--out", sw_out, "Output CSV")->required();
  add_seed(sw);
  sw->callback([&] {
    action = [&] { return cmd_sweep(so, sweep_arch, sweep_train, sweep_recon, sw_out, seed); };
  });

  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    return action ? action() : 1;
  } catch (const MissingInput& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitMissingInput;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace ddp::cli
