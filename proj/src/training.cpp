#include "ganova/training.hpp"

#include <nlohmann/json.hpp>

#include <bit>
#include <chrono>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

namespace ganova {

using json = nlohmann::json;

void TrainConfig::validate() const {
    method_from_string(method);
    if (k < 1) throw ConfigError("TrainConfig: k must be >= 1");
    if (m < 1) throw ConfigError("TrainConfig: m must be >= 1");
    if (iterations < 1) throw ConfigError("TrainConfig: iterations must be >= 1");
    if (d_z < 1) throw ConfigError("TrainConfig: d_z must be >= 1");
    if (lambda < 0.0) throw ConfigError("TrainConfig: lambda must be >= 0");
    if (log_interval < 1) throw ConfigError("TrainConfig: log_interval must be >= 1");
    if (!(dropout >= 0.0 && dropout < 1.0)) throw ConfigError("TrainConfig: dropout must be in [0,1)");
    if (dataset != "mixture" && dataset != "mnist") {
        throw ConfigError("TrainConfig: unknown dataset '" + dataset + "'");
    }
    if (mixture_classes < 2) throw ConfigError("TrainConfig: mixture_classes must be >= 2");
    adam_g().validate();
    adam_d().validate();
}

namespace {

json config_to_json_obj(const TrainConfig& c) {
    return json{{"method", c.method},
                {"k", c.k},
                {"m", c.m},
                {"iterations", c.iterations},
                {"lambda", c.lambda},
                {"alpha_g", c.alpha_g},
                {"beta1_g", c.beta1_g},
                {"beta2_g", c.beta2_g},
                {"alpha_d", c.alpha_d},
                {"beta1_d", c.beta1_d},
                {"beta2_d", c.beta2_d},
                {"eps_stab", c.eps_stab},
                {"d_z", c.d_z},
                {"seed", c.seed},
                {"dataset", c.dataset},
                {"checkpoint_path", c.checkpoint_path},
                {"metrics_path", c.metrics_path},
                {"log_interval", c.log_interval},
                {"dropout", c.dropout},
                {"leaky_slope", c.leaky_slope},
                {"mixture_classes", c.mixture_classes},
                {"mixture_per_class", c.mixture_per_class},
                {"mixture_sigma", c.mixture_sigma},
                {"gen_hidden", c.gen_hidden},
                {"critic_hidden", c.critic_hidden}};
}

}  // namespace

std::string TrainConfig::to_json() const {
    return config_to_json_obj(*this).dump(2);
}

const std::vector<std::string>& TrainConfig::known_keys() {
    static const std::vector<std::string> keys = [] {
        std::vector<std::string> k;
        json j = config_to_json_obj(TrainConfig{});
        for (auto& [key, _] : j.items()) k.push_back(key);
        return k;
    }();
    return keys;
}

TrainConfig TrainConfig::from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config parse error: ") + e.what());
    }
    TrainConfig c;
    const auto& keys = known_keys();
    for (auto& [key, _] : j.items()) {
        if (std::find(keys.begin(), keys.end(), key) == keys.end()) {
            throw ConfigError("unknown config key '" + key + "'");
        }
    }
    try {
        if (j.contains("method")) c.method = j["method"];
        if (j.contains("k")) c.k = j["k"];
        if (j.contains("m")) c.m = j["m"];
        if (j.contains("iterations")) c.iterations = j["iterations"];
        if (j.contains("lambda")) c.lambda = j["lambda"];
        if (j.contains("alpha_g")) c.alpha_g = j["alpha_g"];
        if (j.contains("beta1_g")) c.beta1_g = j["beta1_g"];
        if (j.contains("beta2_g")) c.beta2_g = j["beta2_g"];
        if (j.contains("alpha_d")) c.alpha_d = j["alpha_d"];
        if (j.contains("beta1_d")) c.beta1_d = j["beta1_d"];
        if (j.contains("beta2_d")) c.beta2_d = j["beta2_d"];
        if (j.contains("eps_stab")) c.eps_stab = j["eps_stab"];
        if (j.contains("d_z")) c.d_z = j["d_z"];
        if (j.contains("seed")) c.seed = j["seed"];
        if (j.contains("dataset")) c.dataset = j["dataset"];
        if (j.contains("checkpoint_path")) c.checkpoint_path = j["checkpoint_path"];
        if (j.contains("metrics_path")) c.metrics_path = j["metrics_path"];
        if (j.contains("log_interval")) c.log_interval = j["log_interval"];
        if (j.contains("dropout")) c.dropout = j["dropout"];
        if (j.contains("leaky_slope")) c.leaky_slope = j["leaky_slope"];
        if (j.contains("mixture_classes")) c.mixture_classes = j["mixture_classes"];
        if (j.contains("mixture_per_class")) c.mixture_per_class = j["mixture_per_class"];
        if (j.contains("mixture_sigma")) c.mixture_sigma = j["mixture_sigma"];
        if (j.contains("gen_hidden")) c.gen_hidden = j["gen_hidden"].get<std::vector<std::size_t>>();
        if (j.contains("critic_hidden")) c.critic_hidden = j["critic_hidden"].get<std::vector<std::size_t>>();
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config value error: ") + e.what());
    }
    return c;
}

void TrainConfig::apply_override(const std::string& key, const std::string& value) {
    const auto& keys = known_keys();
    if (std::find(keys.begin(), keys.end(), key) == keys.end()) {
        throw ConfigError("unknown config key '" + key + "'");
    }
    json j = config_to_json_obj(*this);
    json parsed;
    if (j[key].is_string()) {
        parsed = value;
    } else {
        try {
            parsed = json::parse(value);
        } catch (const json::parse_error&) {
            throw ConfigError("cannot parse value '" + value + "' for key '" + key + "'");
        }
    }
    j[key] = parsed;
    *this = from_json(j.dump());
}

ModelShapes make_model_shapes(const TrainConfig& cfg, int n_classes, std::size_t d_x) {
    bool mnist = cfg.dataset == "mnist";
    std::vector<std::size_t> gen_hidden = cfg.gen_hidden;
    std::vector<std::size_t> critic_hidden = cfg.critic_hidden;
    if (gen_hidden.empty()) {
        gen_hidden = mnist ? std::vector<std::size_t>{256, 512, 1024}
                           : std::vector<std::size_t>{64, 64};
    }
    if (critic_hidden.empty()) {
        critic_hidden = mnist ? std::vector<std::size_t>{512, 512, 512}
                              : std::vector<std::size_t>{64, 64};
    }
    TargetScheme scheme = cfg.method_enum() == Method::JS ? TargetScheme::js(n_classes)
                                                          : TargetScheme::em(n_classes);
    ModelShapes shapes{
        MlpSpec::dense(cfg.d_z + static_cast<std::size_t>(n_classes), gen_hidden, d_x,
                       Act::Tanh, 0.0, cfg.leaky_slope),
        MlpSpec::dense(d_x, critic_hidden, scheme.width(), Act::None, cfg.dropout,
                       cfg.leaky_slope),
        scheme};
    return shapes;
}

// --- checkpoint serialization ------------------------------------------------
//
// Layout: magic "GOVA", version byte, length-prefixed config JSON and rng
// state strings, iteration u64, d_x u64, n_classes u32, then a table of
// (name-length u32, name, rank u32, extents u64..., f64 payload), everything
// little-endian.

namespace {

constexpr char kMagic[4] = {'G', 'O', 'V', 'A'};

void put_bytes(std::ostream& os, const void* p, std::size_t n) {
    os.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
}

void put_u32(std::ostream& os, std::uint32_t x) {
    unsigned char b[4];
    for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>(x >> (8 * i));
    put_bytes(os, b, 4);
}

void put_u64(std::ostream& os, std::uint64_t x) {
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(x >> (8 * i));
    put_bytes(os, b, 8);
}

void put_f64(std::ostream& os, double x) {
    put_u64(os, std::bit_cast<std::uint64_t>(x));
}

void put_string(std::ostream& os, const std::string& s) {
    put_u32(os, static_cast<std::uint32_t>(s.size()));
    put_bytes(os, s.data(), s.size());
}

void put_tensor(std::ostream& os, const std::string& name, const Tensor& t) {
    put_string(os, name);
    put_u32(os, static_cast<std::uint32_t>(t.rank()));
    for (std::size_t e : t.shape) put_u64(os, e);
    for (double v : t.v) put_f64(os, v);
}

class Reader {
public:
    Reader(std::istream& in, std::string path) : in_(in), path_(std::move(path)) {}

    void bytes(void* p, std::size_t n) {
        in_.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
        if (static_cast<std::size_t>(in_.gcount()) != n) {
            throw ParseError(ParseError::Kind::Truncated, path_ + ": checkpoint truncated");
        }
    }

    std::uint32_t u32() {
        unsigned char b[4];
        bytes(b, 4);
        std::uint32_t x = 0;
        for (int i = 3; i >= 0; --i) x = (x << 8) | b[i];
        return x;
    }

    std::uint64_t u64() {
        unsigned char b[8];
        bytes(b, 8);
        std::uint64_t x = 0;
        for (int i = 7; i >= 0; --i) x = (x << 8) | b[i];
        return x;
    }

    double f64() { return std::bit_cast<double>(u64()); }

    std::string string() {
        std::uint32_t n = u32();
        std::string s(n, '\0');
        bytes(s.data(), n);
        return s;
    }

    Tensor tensor(std::string* name) {
        *name = string();
        std::uint32_t rank = u32();
        if (rank > 4) throw ParseError(ParseError::Kind::Corrupt, path_ + ": implausible tensor rank");
        Shape shape(rank);
        std::size_t total = 1;
        for (auto& e : shape) {
            e = static_cast<std::size_t>(u64());
            if (e == 0 || total > (1ull << 33) / std::max<std::size_t>(e, 1)) {
                throw ParseError(ParseError::Kind::Corrupt, path_ + ": implausible tensor extent");
            }
            total *= e;
        }
        Tensor t(shape);
        for (double& v : t.v) v = f64();
        return t;
    }

private:
    std::istream& in_;
    std::string path_;
};

std::vector<std::pair<std::string, Tensor>> bundle_tensors(const CheckpointBundle& b) {
    std::vector<std::pair<std::string, Tensor>> out;
    auto add_params = [&](const std::string& prefix, const MlpParams& p) {
        for (std::size_t i = 0; i < p.layer_count(); ++i) {
            out.emplace_back(prefix + "/weight_" + std::to_string(i), p.weights[i]);
            out.emplace_back(prefix + "/bias_" + std::to_string(i), p.biases[i]);
        }
    };
    auto add_adam = [&](const std::string& prefix, const AdamState& s) {
        for (std::size_t i = 0; i < s.m_weights.size(); ++i) {
            std::string idx = std::to_string(i);
            out.emplace_back(prefix + "/m_weight_" + idx, s.m_weights[i]);
            out.emplace_back(prefix + "/v_weight_" + idx, s.v_weights[i]);
            out.emplace_back(prefix + "/m_bias_" + idx, s.m_biases[i]);
            out.emplace_back(prefix + "/v_bias_" + idx, s.v_biases[i]);
        }
        out.emplace_back(prefix + "/t", Tensor::scalar(static_cast<double>(s.t)));
    };
    add_params("g", b.generator);
    add_params("d", b.critic);
    add_adam("adam_g", b.adam_g);
    add_adam("adam_d", b.adam_d);
    Tensor perm({std::max<std::size_t>(b.batch_state.permutation.size(), 1)});
    if (b.batch_state.permutation.empty()) {
        perm = Tensor::zeros({1});
    } else {
        for (std::size_t i = 0; i < b.batch_state.permutation.size(); ++i) {
            perm.v[i] = static_cast<double>(b.batch_state.permutation[i]);
        }
    }
    out.emplace_back("batch/perm", std::move(perm));
    out.emplace_back("batch/cursor", Tensor::scalar(static_cast<double>(b.batch_state.cursor)));
    return out;
}

}  // namespace

void save_checkpoint(const CheckpointBundle& bundle, const std::string& path) {
    // write to a temp file then rename, so a crash never leaves a partial
    // checkpoint at the target path
    std::string tmp = path + ".tmp";
    {
        std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
        if (!os) throw DataError("cannot write checkpoint to " + tmp);
        put_bytes(os, kMagic, 4);
        unsigned char version = bundle.version;
        put_bytes(os, &version, 1);
        put_string(os, bundle.config.to_json());
        put_string(os, bundle.rng_state);
        put_u64(os, bundle.iteration);
        put_u64(os, bundle.d_x);
        put_u32(os, static_cast<std::uint32_t>(bundle.n_classes));
        auto tensors = bundle_tensors(bundle);
        put_u32(os, static_cast<std::uint32_t>(tensors.size()));
        for (const auto& [name, t] : tensors) put_tensor(os, name, t);
        if (!os) throw DataError("write failure on " + tmp);
    }
    std::remove(path.c_str());
    if (std::rename(tmp.c_str(), path.c_str()) != 0) {
        throw DataError("cannot move checkpoint into place at " + path);
    }
}

CheckpointBundle load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open checkpoint " + path);
    Reader r(in, path);
    char magic[4];
    r.bytes(magic, 4);
    if (std::memcmp(magic, kMagic, 4) != 0) {
        throw ParseError(ParseError::Kind::BadMagic, path + ": not a GOVA checkpoint");
    }
    unsigned char version;
    r.bytes(&version, 1);
    if (version != 1) {
        throw ParseError(ParseError::Kind::BadVersion,
                         path + ": unsupported checkpoint version " + std::to_string(version));
    }
    CheckpointBundle b;
    b.version = version;
    b.config = TrainConfig::from_json(r.string());
    b.rng_state = r.string();
    b.iteration = r.u64();
    b.d_x = static_cast<std::size_t>(r.u64());
    b.n_classes = static_cast<int>(r.u32());

    std::uint32_t count = r.u32();
    std::unordered_map<std::string, Tensor> table;
    for (std::uint32_t i = 0; i < count; ++i) {
        std::string name;
        Tensor t = r.tensor(&name);
        table.emplace(std::move(name), std::move(t));
    }
    auto take = [&](const std::string& name) -> Tensor {
        auto it = table.find(name);
        if (it == table.end()) {
            throw ParseError(ParseError::Kind::Corrupt, path + ": missing tensor " + name);
        }
        Tensor t = std::move(it->second);
        table.erase(it);
        return t;
    };
    auto read_params = [&](const std::string& prefix) {
        MlpParams p;
        for (std::size_t i = 0;; ++i) {
            std::string wname = prefix + "/weight_" + std::to_string(i);
            if (table.find(wname) == table.end()) break;
            p.weights.push_back(take(wname));
            p.biases.push_back(take(prefix + "/bias_" + std::to_string(i)));
        }
        if (p.weights.empty()) {
            throw ParseError(ParseError::Kind::Corrupt, path + ": no parameters under " + prefix);
        }
        return p;
    };
    auto read_adam = [&](const std::string& prefix, std::size_t layers) {
        AdamState s;
        for (std::size_t i = 0; i < layers; ++i) {
            std::string idx = std::to_string(i);
            s.m_weights.push_back(take(prefix + "/m_weight_" + idx));
            s.v_weights.push_back(take(prefix + "/v_weight_" + idx));
            s.m_biases.push_back(take(prefix + "/m_bias_" + idx));
            s.v_biases.push_back(take(prefix + "/v_bias_" + idx));
        }
        s.t = static_cast<std::uint64_t>(take(prefix + "/t").v[0]);
        return s;
    };
    b.generator = read_params("g");
    b.critic = read_params("d");
    b.adam_g = read_adam("adam_g", b.generator.layer_count());
    b.adam_d = read_adam("adam_d", b.critic.layer_count());
    Tensor perm = take("batch/perm");
    b.batch_state.permutation.resize(perm.size());
    for (std::size_t i = 0; i < perm.size(); ++i) {
        b.batch_state.permutation[i] = static_cast<std::uint64_t>(perm.v[i]);
    }
    b.batch_state.cursor = static_cast<std::uint64_t>(take("batch/cursor").v[0]);
    return b;
}

// --- metrics ----------------------------------------------------------------

std::string metrics_csv_header() {
    return "iter,d_loss,g_loss,w_estimate,penalty,seconds";
}

std::string metrics_csv_line(const MetricsRow& row) {
    std::ostringstream os;
    os.precision(17);
    os << row.iter << ',' << row.d_loss << ',' << row.g_loss << ',';
    if (row.w_estimate) os << *row.w_estimate;
    os << ',' << row.penalty << ',' << row.seconds;
    return os.str();
}

std::vector<MetricsRow> read_metrics_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open metrics file " + path);
    std::string line;
    if (!std::getline(in, line) || line != metrics_csv_header()) {
        throw ParseError(ParseError::Kind::Corrupt, path + ": bad metrics header");
    }
    std::vector<MetricsRow> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string field;
        MetricsRow row;
        std::getline(ls, field, ',');
        row.iter = static_cast<std::size_t>(std::stoull(field));
        std::getline(ls, field, ',');
        row.d_loss = std::stod(field);
        std::getline(ls, field, ',');
        row.g_loss = std::stod(field);
        std::getline(ls, field, ',');
        if (!field.empty()) row.w_estimate = std::stod(field);
        std::getline(ls, field, ',');
        row.penalty = std::stod(field);
        std::getline(ls, field, ',');
        row.seconds = std::stod(field);
        rows.push_back(row);
    }
    return rows;
}

// --- training loop ------------------------------------------------------------

TrainResult train(const TrainConfig& cfg, const Dataset& data, const CheckpointBundle* resume) {
    cfg.validate();
    data.validate();
    if (cfg.m > data.size()) {
        throw ConfigError("batch size " + std::to_string(cfg.m) + " exceeds dataset size " +
                          std::to_string(data.size()));
    }
    ModelShapes shapes = make_model_shapes(cfg, data.n_classes, data.dim());
    Method method = cfg.method_enum();
    TargetScheme scheme = shapes.scheme;
    NoisePrior prior{cfg.d_z};
    AdamConfig adam_g_cfg = cfg.adam_g();
    AdamConfig adam_d_cfg = cfg.adam_d();

    RandomStream rng(cfg.seed);
    BatchIterator batches(data, cfg.m, rng);

    MlpParams gen, critic;
    AdamState state_g, state_d;
    std::uint64_t start_iter = 0;

    if (resume != nullptr) {
        if (resume->d_x != data.dim() || resume->n_classes != data.n_classes) {
            throw ConfigError("checkpoint was trained on a different dataset shape");
        }
        if (resume->config.method != cfg.method || resume->config.m != cfg.m ||
            resume->config.d_z != cfg.d_z) {
            throw ConfigError("checkpoint config is incompatible with the requested run");
        }
        gen = resume->generator;
        critic = resume->critic;
        state_g = resume->adam_g;
        state_d = resume->adam_d;
        start_iter = resume->iteration;
        rng.restore(resume->rng_state);
        batches.restore(resume->batch_state);
    } else {
        gen = init_params(shapes.generator, rng);
        critic = init_params(shapes.critic, rng);
        state_g = AdamState::zeros_like(gen);
        state_d = AdamState::zeros_like(critic);
    }

    std::ofstream metrics_file;
    if (!cfg.metrics_path.empty()) {
        bool fresh = resume == nullptr;
        metrics_file.open(cfg.metrics_path, fresh ? std::ios::trunc : std::ios::app);
        if (!metrics_file) throw DataError("cannot open metrics file " + cfg.metrics_path);
        if (fresh) metrics_file << metrics_csv_header() << '\n';
    }

    auto make_bundle = [&](std::uint64_t iter) {
        CheckpointBundle b;
        b.config = cfg;
        b.generator = gen;
        b.critic = critic;
        b.adam_g = state_g;
        b.adam_d = state_d;
        b.iteration = iter;
        b.rng_state = rng.serialize();
        b.batch_state = batches.state();
        b.d_x = data.dim();
        b.n_classes = data.n_classes;
        return b;
    };

    TrainResult result;
    result.checkpoint = resume != nullptr ? *resume : make_bundle(start_iter);

    auto t0 = std::chrono::steady_clock::now();
    auto elapsed = [&] {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    };

    double last_gap = 0.0, last_penalty = 0.0;

    for (std::uint64_t iter = start_iter + 1; iter <= cfg.iterations; ++iter) {
        double d_loss_val = 0.0;

        for (int step = 0; step < cfg.k; ++step) {
            ConditionedBatch batch = batches.next();
            Tensor z = sample_noise(prior, cfg.m, rng);

            // synthesize x~ detached: the critic update treats it as data
            Tensor fake_vals;
            {
                Tape gen_tape;
                MlpVars gvars = params_to_tape(gen_tape, gen);
                Var fake = generator_forward(shapes.generator, gvars, gen_tape.leaf(z),
                                             gen_tape.leaf(one_hot(batch.labels, data.n_classes)));
                fake_vals = fake.value();
            }

            Tape tape;
            MlpVars dvars = params_to_tape(tape, critic);
            Var real_x = tape.leaf(batch.samples);
            Var fake_x = tape.leaf(std::move(fake_vals));

            LossBundle d_loss;
            if (method == Method::JS) {
                Var real_logits = critic_forward(shapes.critic, dvars, real_x, true, &rng);
                Var fake_logits = critic_forward(shapes.critic, dvars, fake_x, true, &rng);
                d_loss = loss_d_js(real_logits, fake_logits, batch.labels, batch.labels, scheme);
            } else {
                Var real_scores = critic_forward(shapes.critic, dvars, real_x, true, &rng);
                Var fake_scores = critic_forward(shapes.critic, dvars, fake_x, true, &rng);
                Var x_hat = interpolate_samples(real_x, fake_x, rng);
                LossBundle penalty = gradient_penalty(
                    [&](Var xh) { return critic_forward(shapes.critic, dvars, xh, true, &rng); },
                    x_hat, batch.labels, scheme);
                d_loss = loss_d_em(real_scores, fake_scores, batch.labels, batch.labels, scheme,
                                   &penalty, PenaltyConfig{cfg.lambda});
                last_gap = d_loss.diagnostics["w_estimate"];
                last_penalty = d_loss.diagnostics["penalty"];
            }
            d_loss_val = d_loss.loss.value().v[0];
            if (!std::isfinite(d_loss_val)) {
                MetricsRow row{iter, d_loss_val, std::nan(""), std::nullopt, last_penalty,
                               elapsed()};
                if (method == Method::EM) row.w_estimate = last_gap;
                if (metrics_file.is_open()) metrics_file << metrics_csv_line(row) << std::endl;
                result.metrics.push_back(row);
                result.aborted = true;
                result.abort_iter = iter;
                return result;
            }
            GradientMap grads = tape.backward(d_loss.loss);
            adam_step(critic, dvars, grads, state_d, adam_d_cfg, Direction::Descend);
        }

        // generator update: fresh noise, conditions from the empirical label
        // distribution
        Tensor z = sample_noise(prior, cfg.m, rng);
        std::vector<int> cond(cfg.m);
        for (int& c : cond) c = data.labels[rng.index(data.size())];

        Tape tape;
        MlpVars gvars = params_to_tape(tape, gen);
        MlpVars dvars = params_to_tape(tape, critic);
        Var fake = generator_forward(shapes.generator, gvars, tape.leaf(z),
                                     tape.leaf(one_hot(cond, data.n_classes)));
        Var scores = critic_forward(shapes.critic, dvars, fake, true, &rng);
        LossBundle g_loss = method == Method::JS ? loss_g_js(scores, cond, scheme)
                                                 : loss_g_em(scores, cond, scheme);
        double g_loss_val = g_loss.loss.value().v[0];
        if (!std::isfinite(g_loss_val)) {
            MetricsRow row{iter, d_loss_val, g_loss_val, std::nullopt, last_penalty, elapsed()};
            if (method == Method::EM) row.w_estimate = last_gap;
            if (metrics_file.is_open()) metrics_file << metrics_csv_line(row) << std::endl;
            result.metrics.push_back(row);
            result.aborted = true;
            result.abort_iter = iter;
            return result;
        }
        GradientMap grads = tape.backward(g_loss.loss);
        adam_step(gen, gvars, grads, state_g, adam_g_cfg, Direction::Descend);

        if (iter % cfg.log_interval == 0 || iter == cfg.iterations) {
            MetricsRow row{iter, d_loss_val, g_loss_val, std::nullopt, last_penalty, elapsed()};
            if (method == Method::EM) row.w_estimate = last_gap;
            if (metrics_file.is_open()) {
                metrics_file << metrics_csv_line(row) << std::endl;  // flush before checkpoint
            }
            result.metrics.push_back(row);
            result.checkpoint = make_bundle(iter);
            if (!cfg.checkpoint_path.empty()) {
                save_checkpoint(result.checkpoint, cfg.checkpoint_path);
            }
        }
    }

    if (result.checkpoint.iteration != cfg.iterations) {
        result.checkpoint = make_bundle(cfg.iterations);
        if (!cfg.checkpoint_path.empty()) save_checkpoint(result.checkpoint, cfg.checkpoint_path);
    }
    return result;
}

}  // namespace ganova
