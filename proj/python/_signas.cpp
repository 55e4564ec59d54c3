#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <fstream>
#include <sstream>

#include "cli.hpp"
#include "signas/archspace.hpp"
#include "signas/compress.hpp"
#include "signas/error.hpp"
#include "signas/evaluate.hpp"
#include "signas/metrics.hpp"
#include "signas/netmodel.hpp"
#include "signas/search.hpp"
#include "signas/version.hpp"
#include "signas/wfdb.hpp"

namespace py = pybind11;
using namespace signas;

namespace {

py::dict point_dict(const EvaluatedPoint& p) {
    py::dict d;
    d["arch"] = p.arch;
    d["quality"] = p.quality;
    d["storage_bytes"] = p.storage_bytes;
    d["flops"] = p.flops;
    d["fitness"] = p.fitness;
    d["generation"] = p.generation;
    return d;
}

py::list point_list(const std::vector<EvaluatedPoint>& points) {
    py::list out;
    for (const auto& p : points) out.append(point_dict(p));
    return out;
}

py::dict search(const std::string& engine, double alpha, double beta, std::optional<std::int64_t> s_const,
                std::optional<double> q_const, std::uint64_t seed, std::size_t population, std::size_t generations,
                const std::string& evaluator, const std::string& metric, std::optional<double> s_max_bytes) {
    const auto space = enumerate();
    const NetConfig net;
    const CostFunction cf{alpha, beta, s_max_bytes.value_or(static_cast<double>(s_max(space, net)))};
    Constraints constraints;
    constraints.s_const = s_const;
    constraints.q_const = q_const;
    constraints.metric = parse_metric_choice(metric);
    GaSettings ga;
    ga.population_size = population;
    ga.generations = generations;
    ga.seed = seed;

    const auto spec = cli::parse_evaluator_spec(evaluator);
    std::unique_ptr<Evaluator> backend;
    if (spec.backend == "surrogate") backend = std::make_unique<SurrogateEvaluator>(net, seed);
    else if (spec.backend == "table") backend = std::make_unique<TableEvaluator>(TableEvaluator::from_file(spec.endpoint));
    else throw DomainError("python search supports the surrogate and table evaluators");
    CachedEvaluator cached(*backend);

    SearchResult r;
    {
        py::gil_scoped_release release;
        r = run_algorithm1(space, cf, constraints, parse_engine(engine), ga, cached, net);
    }
    py::dict out;
    out["engine"] = std::string(to_string(r.engine));
    out["evaluated"] = point_list(rank_by_fitness(r.evaluated));
    out["pareto"] = point_list(r.pareto);
    out["omega"] = point_list(r.omega);
    out["unique_eval_calls"] = r.unique_eval_calls;
    out["space_size"] = r.space_size;
    out["s_max"] = cf.s_max;
    return out;
}

TensorStore store_from_dict(const py::dict& tensors) {
    TensorStore store;
    for (const auto& [key, value] : tensors) {
        auto arr = py::array_t<float, py::array::c_style | py::array::forcecast>::ensure(value);
        if (!arr) throw DomainError("tensor values must be array-like");
        Tensor t;
        t.name = key.cast<std::string>();
        for (py::ssize_t i = 0; i < arr.ndim(); ++i) t.shape.push_back(static_cast<std::uint32_t>(arr.shape(i)));
        t.values.assign(arr.data(), arr.data() + arr.size());
        store.add(std::move(t));
    }
    return store;
}

py::dict store_to_dict(const TensorStore& store) {
    py::dict out;
    for (const auto& t : store.tensors()) {
        std::vector<py::ssize_t> shape(t.shape.begin(), t.shape.end());
        py::array_t<float> arr(shape);
        std::copy(t.values.begin(), t.values.end(), arr.mutable_data());
        out[py::str(t.name)] = arr;
    }
    return out;
}

py::dict dataset_arrays(const wfdb::WindowedDataset& ds) {
    const auto n = static_cast<py::ssize_t>(ds.windows.size());
    const auto ch = static_cast<py::ssize_t>(ds.channels);
    const auto len = static_cast<py::ssize_t>(ds.window);
    py::array_t<std::int16_t> x({n, ch, len});
    py::array_t<std::int64_t> y(n);
    py::array_t<std::uint8_t> split(n);
    auto* xp = x.mutable_data();
    for (py::ssize_t i = 0; i < n; ++i) {
        const auto& w = ds.windows[static_cast<std::size_t>(i)];
        std::copy(w.samples.begin(), w.samples.end(), xp + i * ch * len);
        y.mutable_data()[i] = w.label;
        split.mutable_data()[i] = static_cast<std::uint8_t>(ds.split_of(static_cast<std::size_t>(i)));
    }
    py::dict out;
    out["task_id"] = ds.task_id;
    out["classes"] = ds.classes;
    out["seed"] = ds.seed;
    out["x"] = x;
    out["y"] = y;
    out["split"] = split;
    return out;
}

}  // namespace

PYBIND11_MODULE(_signas, m) {
    m.doc() = "Architecture space, cost model, search, compression and WFDB parsing";
    m.attr("__version__") = std::string(version);

    py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
    py::register_exception<FormatError>(m, "FormatError", PyExc_ValueError);

    py::class_<ArchParams>(m, "ArchParams")
        .def(py::init([](int b, int x, int z) { return ArchParams{b, x, z}; }), py::arg("B"), py::arg("x"),
             py::arg("z"))
        .def_readwrite("B", &ArchParams::blocks)
        .def_readwrite("x", &ArchParams::filter_interval)
        .def_readwrite("z", &ArchParams::lstm_exp)
        .def("valid", &ArchParams::valid)
        .def("index", &ArchParams::index)
        .def_property_readonly("lstm_cells", &ArchParams::lstm_cells)
        .def("__eq__", [](const ArchParams& a, const ArchParams& b) { return a == b; })
        .def("__lt__", [](const ArchParams& a, const ArchParams& b) { return a < b; })
        .def("__hash__", [](const ArchParams& a) { return a.valid() ? a.index() : 1000u; })
        .def("__repr__", [](const ArchParams& a) { return "ArchParams(" + to_string(a) + ")"; })
        .def("__str__", [](const ArchParams& a) { return to_string(a); });

    m.def("enumerate_space", &enumerate, "All 320 architectures in canonical order");
    m.def("parse_arch", &parse_arch, py::arg("text"));
    m.def("encode", [](const ArchParams& a) { return encode(a).to_string(); }, py::arg("arch"));
    m.def("decode", [](const std::string& bits) { return decode(std::string_view(bits)); }, py::arg("bits"));

    py::class_<NetConfig>(m, "NetConfig")
        .def(py::init<>())
        .def_readwrite("input_len", &NetConfig::input_len)
        .def_readwrite("input_channels", &NetConfig::input_channels)
        .def_readwrite("kernel", &NetConfig::kernel)
        .def_readwrite("base_filters", &NetConfig::base_filters)
        .def_readwrite("num_classes", &NetConfig::num_classes)
        .def_readwrite("bytes_per_param", &NetConfig::bytes_per_param);

    m.def(
        "build",
        [](const ArchParams& arch, const NetConfig& cfg) {
            const auto s = build(arch, cfg);
            py::list layers;
            for (const auto& l : s.layers) {
                py::dict d;
                d["kind"] = std::string(to_string(l.kind));
                d["in_channels"] = l.in_channels;
                d["out_channels"] = l.out_channels;
                d["output_len"] = l.output_len;
                d["params"] = l.params;
                d["flops"] = l.flops;
                d["kernel"] = l.kernel;
                d["shortcut"] = l.shortcut;
                layers.append(d);
            }
            py::dict out;
            out["layers"] = layers;
            out["param_count"] = s.param_count;
            out["storage_bytes"] = s.storage_bytes;
            out["flops"] = s.flops;
            return out;
        },
        py::arg("arch"), py::arg("cfg") = NetConfig{});
    m.def(
        "weight_shapes",
        [](const ArchParams& arch, const NetConfig& cfg) {
            std::vector<std::pair<std::string, std::vector<std::uint32_t>>> out;
            for (const auto& w : weight_shapes(arch, cfg)) out.emplace_back(w.name, w.shape);
            return out;
        },
        py::arg("arch"), py::arg("cfg") = NetConfig{});
    m.def("filter_schedule", &filter_schedule, py::arg("arch"), py::arg("base_filters") = 32);

    // metrics
    m.def(
        "quality_report",
        [](const std::vector<std::vector<std::uint64_t>>& rows, const std::vector<std::string>& labels) {
            std::vector<std::uint64_t> flat;
            for (const auto& r : rows) {
                if (r.size() != rows.size()) throw DomainError("confusion matrix must be square");
                flat.insert(flat.end(), r.begin(), r.end());
            }
            const auto report = make_report(ConfusionMatrix(rows.size(), flat), labels);
            py::list per_class;
            for (const auto& c : report.per_class) {
                py::dict d;
                d["label"] = c.label;
                d["precision"] = c.precision;
                d["recall"] = c.recall;
                d["f1"] = c.f1;
                d["degenerate"] = c.degenerate;
                per_class.append(d);
            }
            py::dict out;
            out["accuracy"] = report.accuracy;
            out["per_class"] = per_class;
            return out;
        },
        py::arg("confusion"), py::arg("labels") = std::vector<std::string>{});
    m.def(
        "roc_curve",
        [](const std::vector<double>& scores, const std::vector<bool>& positive) {
            std::unique_ptr<bool[]> flags(new bool[positive.size()]);
            std::copy(positive.begin(), positive.end(), flags.get());
            const auto curve = roc_curve(scores, std::span<const bool>(flags.get(), positive.size()));
            std::vector<std::tuple<double, double, double>> points;
            for (const auto& p : curve.points) points.emplace_back(p.threshold, p.fpr, p.tpr);
            return py::make_tuple(points, curve.auc);
        },
        py::arg("scores"), py::arg("positive"));

    // wire protocol helpers for trainers
    m.def(
        "parse_request",
        [](const std::string& line) {
            const auto req = parse_request(line);
            py::dict d;
            d["id"] = req.id;
            d["arch"] = req.arch;
            d["classes"] = req.task.classes;
            d["dataset"] = req.task.dataset;
            d["lr"] = req.hp.learning_rate;
            d["batch"] = req.hp.batch_size;
            d["dropout"] = req.hp.dropout;
            d["beta1"] = req.hp.beta1;
            d["beta2"] = req.hp.beta2;
            d["max_epochs"] = req.hp.max_epochs;
            d["mask"] = req.mask ? py::object(py::str(*req.mask)) : py::object(py::none());
            return d;
        },
        py::arg("line"));
    m.def(
        "format_response",
        [](std::uint64_t id, const std::vector<std::vector<std::uint64_t>>& confusion,
           const std::vector<std::string>& labels) {
            std::vector<std::uint64_t> flat;
            for (const auto& r : confusion) flat.insert(flat.end(), r.begin(), r.end());
            EvalResponse resp;
            resp.id = id;
            resp.quality = make_report(ConfusionMatrix(confusion.size(), flat), labels);
            return to_wire(resp);
        },
        py::arg("id"), py::arg("confusion"), py::arg("labels"));
    m.def(
        "format_failure",
        [](std::uint64_t id, const std::string& reason) {
            EvalResponse resp;
            resp.id = id;
            resp.status = EvalStatus::failed;
            resp.reason = reason;
            return to_wire(resp);
        },
        py::arg("id"), py::arg("reason"));
    m.def("surrogate_quality", [](const ArchParams& a, std::uint64_t seed) {
        return SurrogateEvaluator::quality(a, NetConfig{}, seed);
    }, py::arg("arch"), py::arg("seed") = 0);

    // search
    m.def("search", &search, py::arg("engine") = "nsga2", py::arg("alpha") = 0.5, py::arg("beta") = 0.5,
          py::arg("s_const") = py::none(), py::arg("q_const") = py::none(), py::arg("seed") = 1,
          py::arg("population") = 30, py::arg("generations") = 5, py::arg("evaluator") = "surrogate",
          py::arg("metric") = "accuracy", py::arg("s_max") = py::none());
    m.def(
        "nondominated_sort",
        [](const std::vector<std::vector<double>>& objectives) {
            const auto f = nondominated_sort(std::span<const std::vector<double>>(objectives));
            return py::make_tuple(f.fronts, f.rank, f.crowding);
        },
        py::arg("objectives"), "Fronts, ranks and crowding distances; every objective is maximized");
    m.def("run_cli", [](const std::vector<std::string>& args) { return cli::run(args); }, py::arg("args"));

    // compress
    m.def(
        "prune",
        [](const py::dict& tensors, double fraction, const std::string& mode, bool prune_vectors) {
            const auto r = prune(store_from_dict(tensors), PruneSpec{fraction, parse_prune_mode(mode), prune_vectors});
            return py::make_tuple(store_to_dict(r.store), r.pruned);
        },
        py::arg("tensors"), py::arg("fraction"), py::arg("mode") = "class-blind", py::arg("prune_vectors") = false);
    m.def(
        "compress",
        [](const py::dict& tensors, double fraction, int bits, const std::string& mode, const std::string& codebook,
           std::uint64_t seed) {
            const auto store = store_from_dict(tensors);
            const auto pruned = prune(store, PruneSpec{fraction, parse_prune_mode(mode), false});
            const auto cs = quantize(pruned.store, QuantSpec{bits, parse_codebook_mode(codebook), seed});
            const auto bytes = serialize(cs);
            py::dict out;
            out["container"] = py::bytes(reinterpret_cast<const char*>(bytes.data()), bytes.size());
            out["storage_bytes"] = storage_bytes(cs);
            out["dense_bytes"] = dense_bytes(store);
            out["ratio"] = compression_ratio(store, cs);
            out["reconstructed"] = store_to_dict(decompress(cs));
            return out;
        },
        py::arg("tensors"), py::arg("fraction") = 0.9, py::arg("bits") = 4, py::arg("mode") = "class-blind",
        py::arg("codebook") = "equally-spaced", py::arg("seed") = 1);
    m.def(
        "decompress",
        [](const py::bytes& container) {
            const std::string raw = container;
            const std::vector<std::uint8_t> data(raw.begin(), raw.end());
            return store_to_dict(decompress(deserialize_compressed(data)));
        },
        py::arg("container"));

    // wfdb
    m.def(
        "decode_212",
        [](const py::bytes& data) {
            const std::string raw = data;
            const std::vector<std::uint8_t> bytes(raw.begin(), raw.end());
            return wfdb::decode_212(bytes);
        },
        py::arg("data"));
    m.def(
        "encode_212",
        [](const std::vector<std::int16_t>& samples) {
            const auto bytes = wfdb::encode_212(samples);
            return py::bytes(reinterpret_cast<const char*>(bytes.data()), bytes.size());
        },
        py::arg("samples"));
    m.def(
        "parse_annotations",
        [](const py::bytes& data) {
            const std::string raw = data;
            const std::vector<std::uint8_t> bytes(raw.begin(), raw.end());
            std::vector<std::tuple<std::int64_t, std::string, std::optional<std::string>>> out;
            for (const auto& a : wfdb::parse_annotations(bytes)) out.emplace_back(a.sample, a.symbol, a.aux);
            return out;
        },
        py::arg("data"));
    m.def(
        "read_dataset",
        [](const std::string& path) {
            std::ifstream in(path, std::ios::binary);
            if (!in) throw FormatError("cannot open " + path);
            return dataset_arrays(wfdb::read_dataset(in));
        },
        py::arg("path"), "Windows as x[N, channels, window] int16, labels y and split tags (0 train, 1 val, 2 test)");
}
