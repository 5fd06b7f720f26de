#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "ganova/eval.hpp"
#include "ganova/gradcheck.hpp"

namespace py = pybind11;
using namespace ganova;

namespace {

py::array_t<double> tensor_to_numpy(const Tensor& t) {
    std::vector<py::ssize_t> shape(t.shape.begin(), t.shape.end());
    py::array_t<double> out(shape);
    std::copy(t.v.begin(), t.v.end(), out.mutable_data());
    return out;
}

Tensor numpy_to_tensor(const py::array_t<double, py::array::c_style | py::array::forcecast>& a) {
    Shape shape(a.ndim());
    for (py::ssize_t i = 0; i < a.ndim(); ++i) {
        shape[static_cast<std::size_t>(i)] = static_cast<std::size_t>(a.shape(i));
    }
    Tensor t(shape);
    std::copy(a.data(), a.data() + a.size(), t.v.begin());
    return t;
}

}  // namespace

PYBIND11_MODULE(_ganova, m) {
    m.doc() = "conditional GAN toolkit with a one-vs-all critic";

    py::register_exception<Error>(m, "GanovaError", PyExc_RuntimeError);

    py::class_<CheckpointBundle>(m, "Checkpoint")
        .def_property_readonly("iteration",
                               [](const CheckpointBundle& b) { return b.iteration; })
        .def_property_readonly("n_classes",
                               [](const CheckpointBundle& b) { return b.n_classes; })
        .def_property_readonly("d_x", [](const CheckpointBundle& b) { return b.d_x; })
        .def_property_readonly("config_json",
                               [](const CheckpointBundle& b) { return b.config.to_json(); })
        .def("save",
             [](const CheckpointBundle& b, const std::string& path) {
                 save_checkpoint(b, path);
             },
             py::arg("path"))
        .def("generate",
             [](const CheckpointBundle& b, const std::vector<int>& labels, std::uint64_t seed) {
                 GeneratorHandle gen = generator_from_checkpoint(b);
                 RandomStream rng(seed);
                 return tensor_to_numpy(gen.generate_labels(labels, rng));
             },
             py::arg("labels"), py::arg("seed") = 0,
             "Sample one row per label with noise drawn from `seed`.")
        .def("sweep",
             [](const CheckpointBundle& b, int class_index, std::size_t steps, double code_min,
                double code_max, std::uint64_t seed) {
                 GeneratorHandle gen = generator_from_checkpoint(b);
                 SweepSpec spec{class_index, code_min, code_max, steps, seed};
                 return tensor_to_numpy(condition_sweep(gen, spec));
             },
             py::arg("class_index"), py::arg("steps") = 10, py::arg("code_min") = 0.5,
             py::arg("code_max") = 1.85, py::arg("seed") = 0)
        .def("interpolate",
             [](const CheckpointBundle& b, int class_a, int class_b, std::size_t steps,
                std::uint64_t seed) {
                 GeneratorHandle gen = generator_from_checkpoint(b);
                 return tensor_to_numpy(condition_interpolation(gen, class_a, class_b, steps,
                                                                seed));
             },
             py::arg("class_a"), py::arg("class_b"), py::arg("steps") = 10, py::arg("seed") = 0);

    m.def("load_checkpoint", &load_checkpoint, py::arg("path"));

    m.def(
        "train_mixture",
        [](const std::string& method, int classes, std::size_t per_class, double sigma,
           std::size_t iterations, std::uint64_t seed, const std::string& config_json) {
            TrainConfig cfg;
            if (!config_json.empty()) cfg = TrainConfig::from_json(config_json);
            cfg.method = method;
            cfg.dataset = "mixture";
            cfg.mixture_classes = classes;
            cfg.mixture_per_class = per_class;
            cfg.mixture_sigma = sigma;
            cfg.iterations = iterations;
            cfg.seed = seed;
            RandomStream data_rng(seed + 1000);
            Dataset data = mixture_dataset(classes, per_class, sigma, data_rng);
            TrainResult result = train(cfg, data);
            if (result.aborted) {
                throw DomainError("training aborted on non-finite loss at iteration " +
                                  std::to_string(result.abort_iter));
            }
            return result.checkpoint;
        },
        py::arg("method") = "em", py::arg("classes") = 4, py::arg("per_class") = 2500,
        py::arg("sigma") = 0.05, py::arg("iterations") = 1000, py::arg("seed") = 0,
        py::arg("config_json") = "",
        "Train on the 2D Gaussian mixture and return the final checkpoint.");

    m.def(
        "mixture_fidelity",
        [](const CheckpointBundle& b, std::size_t per_class, std::uint64_t seed) {
            GeneratorHandle gen = generator_from_checkpoint(b);
            Tensor means({static_cast<std::size_t>(gen.n_classes), 2});
            for (int c = 0; c < gen.n_classes; ++c) {
                double angle = 2.0 * M_PI * c / gen.n_classes;
                means.at(static_cast<std::size_t>(c), 0) = 0.7 * std::cos(angle);
                means.at(static_cast<std::size_t>(c), 1) = 0.7 * std::sin(angle);
            }
            RandomStream rng(seed);
            FidelityReport rep = conditional_fidelity(gen, mixture_oracle(gen.n_classes), means,
                                                      per_class, rng);
            py::dict out;
            out["fidelity"] = rep.fidelity;
            out["requested"] = rep.requested;
            out["matched"] = rep.matched;
            out["mean_error"] = rep.mean_error;
            out["csv"] = rep.to_csv();
            return out;
        },
        py::arg("checkpoint"), py::arg("per_class") = 100, py::arg("seed") = 0,
        "Oracle-scored conditional fidelity of a mixture checkpoint.");

    m.def(
        "gradcheck",
        [](std::uint64_t seed, int points) {
            GradcheckReport rep = run_gradcheck(seed, points);
            py::list ops;
            for (const OpCheck& op : rep.ops) {
                py::dict d;
                d["op"] = op.op;
                d["worst_rel_err"] = op.worst_rel_err;
                d["threshold"] = op.threshold;
                d["passed"] = op.passed;
                ops.append(d);
            }
            py::dict out;
            out["all_passed"] = rep.all_passed();
            out["ops"] = ops;
            return out;
        },
        py::arg("seed") = 20240901, py::arg("points") = 10,
        "Finite-difference verification of every autodiff primitive.");

    m.def(
        "render_pgm",
        [](const py::array_t<double, py::array::c_style | py::array::forcecast>& images,
           std::size_t rows, std::size_t cols, const std::string& path) {
            render_grid_pgm(numpy_to_tensor(images), rows, cols, path);
        },
        py::arg("images"), py::arg("rows"), py::arg("cols"), py::arg("path"));

    m.def(
        "mixture_samples",
        [](int classes, std::size_t per_class, double sigma, std::uint64_t seed) {
            RandomStream rng(seed);
            Dataset ds = mixture_dataset(classes, per_class, sigma, rng);
            return py::make_tuple(tensor_to_numpy(ds.samples), ds.labels);
        },
        py::arg("classes") = 4, py::arg("per_class") = 2500, py::arg("sigma") = 0.05,
        py::arg("seed") = 0, "Reference 2D mixture dataset as (samples, labels).");
}
