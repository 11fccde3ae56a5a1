#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "cli.hpp"
#include "ddp/errors.hpp"
#include "ddp/fft.hpp"
#include "ddp/imaging.hpp"
#include "ddp/metrics.hpp"
#include "ddp/phantom.hpp"
#include "ddp/prior.hpp"
#include "ddp/recon.hpp"
#include "ddp/sampling.hpp"
#include "ddp/vae.hpp"

namespace py = pybind11;
using namespace ddp;

namespace {

py::dict trace_dict(const ReconTrace& t) {
  std::vector<int> iter;
  std::vector<double> elbo, res, err;
  for (const auto& r : t.rows) {
    iter.push_back(r.iter);
    elbo.push_back(r.elbo_sum);
    res.push_back(r.dc_residual);
    err.push_back(r.rmse);
  }
  py::dict d;
  d["iter"] = iter;
  d["elbo_sum"] = elbo;
  d["dc_residual"] = res;
  d["rmse"] = err;
  return d;
}

ReconConfig make_config(int T, int K, double alpha, int J, bool phase, bool freeze, int warmup, std::uint64_t seed) {
  ReconConfig c;
  c.T = T;
  c.K = K;
  c.alpha = alpha;
  c.J = J;
  c.phase_projection = phase;
  c.freeze_samples = freeze;
  c.warmup_dc_iters = warmup;
  c.seed = seed;
  return c;
}

}  // namespace

PYBIND11_MODULE(_ddp, m) {
  m.doc() = "VAE patch prior and POCS reconstruction for undersampled MRI";

  py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<InvalidArgument>(m, "InvalidArgument", PyExc_ValueError);

  m.def("fft2", [](const ComplexImage& x) { return fft2(x, FftDirection::Forward); }, py::arg("image"));
  m.def("ifft2", [](const ComplexImage& x) { return fft2(x, FftDirection::Inverse); }, py::arg("kspace"));

  py::class_<Phantom>(m, "Phantom")
      .def_readonly("magnitude", &Phantom::magnitude)
      .def_readonly("phase", &Phantom::phase)
      .def_readonly("labels", &Phantom::labels)
      .def_readonly("seed", &Phantom::seed)
      .def("complex_image", &Phantom::complex_image);
  m.def("gen_phantom", py::overload_cast<int, int, std::uint64_t>(&gen_phantom), py::arg("height"), py::arg("width"),
        py::arg("seed"));
  m.def(
      "extract_training_patches",
      [](const std::vector<Phantom>& phs, int p, int count, std::uint64_t seed, double anywhere) {
        Rng rng(seed);
        return extract_training_patches(phs, p, count, rng, anywhere).patches;
      },
      py::arg("phantoms"), py::arg("patch"), py::arg("count"), py::arg("seed") = 0, py::arg("anywhere") = 0.0);

  py::class_<CartesianMask>(m, "CartesianMask")
      .def_readonly("height", &CartesianMask::height)
      .def_readonly("width", &CartesianMask::width)
      .def_readonly("lines", &CartesianMask::lines)
      .def_readonly("ratio", &CartesianMask::ratio)
      .def("image", [](const CartesianMask& mk) { return mask_image(mk); })
      .def("peak_to_side", [](const CartesianMask& mk) { return peak_to_side_ratio(mk); });
  m.def(
      "gen_cartesian_mask",
      [](int h, int w, double ratio, int candidates, std::uint64_t seed) {
        CartesianMaskOptions o;
        o.ratio = ratio;
        o.n_candidates = candidates;
        Rng rng(seed);
        return gen_cartesian_mask(h, w, o, rng);
      },
      py::arg("height"), py::arg("width"), py::arg("ratio"), py::arg("candidates") = 1000, py::arg("seed") = 0);

  py::class_<RadialTrajectory>(m, "RadialTrajectory")
      .def_readonly("spokes", &RadialTrajectory::spokes)
      .def_readonly("samples_per_spoke", &RadialTrajectory::samples_per_spoke);
  m.def("gen_radial_trajectory", &gen_radial_trajectory, py::arg("size"), py::arg("ratio"));

  m.def(
      "simulate_coil_maps",
      [](int h, int w, int coils, std::uint64_t seed) {
        Rng rng(seed);
        return simulate_coil_maps(h, w, coils, rng);
      },
      py::arg("height"), py::arg("width"), py::arg("coils"), py::arg("seed") = 0);

  py::class_<EncodingOperator>(m, "EncodingOperator")
      .def_static("cartesian", &EncodingOperator::cartesian, py::arg("mask"), py::arg("coil_maps"),
                  py::arg("sigma") = 0.0)
      .def_static("nonuniform", &EncodingOperator::nonuniform, py::arg("trajectory"), py::arg("height"),
                  py::arg("width"), py::arg("coil_maps"), py::arg("sigma") = 0.0)
      .def_property_readonly("height", &EncodingOperator::height)
      .def_property_readonly("width", &EncodingOperator::width)
      .def_property_readonly("coils", &EncodingOperator::coils)
      .def("forward", [](const EncodingOperator& op, const ComplexImage& x) { return apply_E(op, x).samples; })
      .def("adjoint", [](const EncodingOperator& op, const Eigen::MatrixXcd& y) { return apply_EH_raw(op, {y}); })
      .def(
          "combine", [](const EncodingOperator& op, const Eigen::MatrixXcd& y) { return apply_EH(op, {y}); },
          "Adjoint followed by the sum-of-squares coil normalisation used in the data projection.");

  py::class_<VaeModel>(m, "VaeModel")
      .def_static(
          "initialize",
          [](int patch, int latent, std::vector<int> enc, std::vector<int> dec, std::uint64_t seed, double init_std) {
            Rng rng(seed);
            return VaeModel::initialize({patch, latent, std::move(enc), std::move(dec)}, rng, init_std);
          },
          py::arg("patch") = 16, py::arg("latent") = 16, py::arg("encoder_channels") = std::vector<int>{32, 64, 64},
          py::arg("decoder_channels") = std::vector<int>{64, 64, 64}, py::arg("seed") = 0, py::arg("init_std") = 0.05)
      .def_static("load", [](const std::string& path) { return checkpoint_load(path); }, py::arg("path"))
      .def("save", [](const VaeModel& mdl, const std::string& path) { checkpoint_save(mdl, path); }, py::arg("path"))
      .def_property_readonly("patch", [](const VaeModel& mdl) { return mdl.arch.patch; })
      .def_property_readonly("latent", [](const VaeModel& mdl) { return mdl.arch.latent; })
      .def_property_readonly("parameter_count", &VaeModel::parameter_count)
      .def(
          "elbo",
          [](const VaeModel& mdl, const RealImage& patch, int samples, std::uint64_t seed) {
            Rng rng(seed);
            return elbo_mc(mdl, patch, samples, rng);
          },
          py::arg("patch"), py::arg("samples") = 1, py::arg("seed") = 0)
      .def(
          "train",
          [](VaeModel& mdl, const Eigen::MatrixXd& patches, int iterations, int batch, double lr, std::uint64_t seed) {
            TrainConfig c;
            c.iterations = iterations;
            c.batch_size = batch;
            c.learning_rate = lr;
            c.seed = seed;
            py::gil_scoped_release release;
            return train_vae(mdl, patches, c);
          },
          py::arg("patches"), py::arg("iterations") = 5000, py::arg("batch") = 32, py::arg("lr") = 5e-4,
          py::arg("seed") = 0)
      .def(
          "sample",
          [](const VaeModel& mdl, int n, std::uint64_t seed) {
            Rng rng(seed);
            std::vector<RealImage> out;
            for (auto& s : sample_prior(mdl, n, rng)) out.push_back(s.mean);
            return out;
          },
          py::arg("n"), py::arg("seed") = 0);

  m.def(
      "reconstruct",
      [](const Eigen::MatrixXcd& y, const EncodingOperator& op, const VaeModel* model, int T, int K, double alpha,
         int J, bool phase, bool freeze, int warmup, std::uint64_t seed, std::optional<ComplexImage> gt) {
        const ReconConfig cfg = make_config(T, K, alpha, J, phase, freeze, warmup, seed);
        ReconResult r;
        {
          py::gil_scoped_release release;
          r = model ? ddp_recon({y}, op, model, cfg, gt ? &*gt : nullptr)
                    : sense_recon({y}, op, cfg, gt ? &*gt : nullptr);
        }
        return py::make_tuple(r.image, trace_dict(r.trace));
      },
      py::arg("kspace"), py::arg("op"), py::arg("model") = nullptr, py::arg("T") = 30, py::arg("K") = 10,
      py::arg("alpha") = 1e-4, py::arg("J") = 1, py::arg("phase") = false, py::arg("freeze_samples") = false,
      py::arg("warmup") = 10, py::arg("seed") = 0, py::arg("ground_truth") = std::nullopt,
      "Runs the POCS reconstruction; without a model only the data projections run. Returns (image, trace).");

  m.def("rmse", [](const ComplexImage& gt, const ComplexImage& rec) { return rmse(gt, rec); });
  m.def("cnr", [](const ComplexImage& rec, const LabelImage& labels) { return cnr(rec, seg_masks_from_labels(labels)); });
  m.def("cn", [](const ComplexImage& rec, const LabelImage& labels) { return cn(rec, seg_masks_from_labels(labels)); });
  m.def("binary_erode", &binary_erode, py::arg("mask"), py::arg("k") = 7);

  m.def("run_cli", &cli::run, py::arg("args"), "Runs a ddp command line and returns its exit code.");
}
