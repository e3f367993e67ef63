#include "wtad/density_net.hpp"

#include <cmath>
#include <cstring>
#include <fstream>

#include <nlohmann/json.hpp>

#include "schema_json.hpp"
#include "wtad/errors.hpp"
#include "wtad/rng.hpp"

namespace wtad {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;

Eigen::VectorXd sigmoid(const Eigen::VectorXd& x) {
    return x.unaryExpr([](double v) { return 1.0 / (1.0 + std::exp(-v)); });
}

double softplus(double x) { return x > 30.0 ? x : std::log1p(std::exp(x)); }
double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

Eigen::VectorXd encode_entry(const ChannelSchema& schema, const LogEntry& e) {
    Eigen::VectorXd x = Eigen::VectorXd::Zero(schema.arity_sum() + schema.sensor_count());
    int off = 0;
    for (int j = 0; j < schema.actuator_count(); ++j) {
        x[off + e.actuator_values[j]] = 1.0;
        off += schema.actuators[j].arity;
    }
    for (int k = 0; k < schema.sensor_count(); ++k) x[off + k] = e.sensor_values[k];
    return x;
}

// Everything the backward pass needs from one scored entry.
struct StepCache {
    bool has_input = false;
    Eigen::VectorXd x, h_prev, c_prev;
    Eigen::VectorXd gi, gf, go, gg, c, hs, h;
    struct ActCache {
        Eigen::VectorXd ctx;      // context the head saw
        Eigen::VectorXd softmax;  // over positions
        int observed = 0;
        Eigen::VectorXd nctx;     // mixed context (empty if no mixer)
    };
    struct SenCache {
        Eigen::VectorXd ctx;
        Eigen::VectorXd u;
        double mu = 0, pv = 0, var = 0, s = 0;
        Eigen::VectorXd nctx;
    };
    std::vector<ActCache> act;
    std::vector<SenCache> sen;
};

}  // namespace

void DensityNetConfig::validate() const {
    if (hidden_dim < 1) throw DataError("density-net: hidden_dim must be >= 1");
    if (truncation_len < 1) throw DataError("density-net: truncation_len must be >= 1");
    if (batch_size < 1) throw DataError("density-net: batch_size must be >= 1");
    if (variance_floor <= 0.0) throw DataError("density-net: variance_floor must be > 0");
    if (epochs < 1) throw DataError("density-net: epochs must be >= 1");
}

std::vector<Eigen::MatrixXd*> NetParams::tensors() {
    std::vector<Eigen::MatrixXd*> out{&wx, &wh, &b};
    for (auto& a : actuators) {
        out.push_back(&a.proj);
        out.push_back(&a.proj_bias);
        for (auto& m : a.mix) out.push_back(&m);
        out.push_back(&a.mix_bias);
    }
    for (auto& s : sensors) {
        out.push_back(&s.fc);
        out.push_back(&s.fc_bias);
        out.push_back(&s.out);
        out.push_back(&s.out_bias);
        out.push_back(&s.mix_bilinear);
        out.push_back(&s.mix_linear);
        out.push_back(&s.mix_bias);
    }
    return out;
}

std::vector<const Eigen::MatrixXd*> NetParams::tensors() const {
    auto mut = const_cast<NetParams*>(this)->tensors();
    return {mut.begin(), mut.end()};
}

NetParams NetParams::zeros_like(const NetParams& shape) {
    NetParams z = shape;
    for (auto* t : z.tensors()) t->setZero();
    return z;
}

namespace {

NetParams make_params(const ChannelSchema& schema, int hidden_dim) {
    const int H = hidden_dim;
    const int D = schema.arity_sum() + schema.sensor_count();
    const int n = schema.actuator_count();
    const int m = schema.sensor_count();
    NetParams p;
    p.wx = Eigen::MatrixXd::Zero(4 * H, D);
    p.wh = Eigen::MatrixXd::Zero(4 * H, H);
    p.b = Eigen::MatrixXd::Zero(4 * H, 1);
    for (int j = 0; j < n; ++j) {
        NetParams::ActuatorHead a;
        const int arity = schema.actuators[j].arity;
        a.proj = Eigen::MatrixXd::Zero(arity, H);
        a.proj_bias = Eigen::MatrixXd::Zero(arity, 1);
        const bool last_channel = (j == n - 1) && m == 0;
        if (!last_channel) {
            a.mix.assign(arity, Eigen::MatrixXd::Zero(H, H));
            a.mix_bias = Eigen::MatrixXd::Zero(H, 1);
        } else {
            a.mix_bias = Eigen::MatrixXd::Zero(0, 0);
        }
        p.actuators.push_back(std::move(a));
    }
    for (int k = 0; k < m; ++k) {
        NetParams::SensorHead s;
        s.fc = Eigen::MatrixXd::Zero(H, H);
        s.fc_bias = Eigen::MatrixXd::Zero(H, 1);
        s.out = Eigen::MatrixXd::Zero(2, H);
        s.out_bias = Eigen::MatrixXd::Zero(2, 1);
        if (k != m - 1) {
            s.mix_bilinear = Eigen::MatrixXd::Zero(H, H);
            s.mix_linear = Eigen::MatrixXd::Zero(H, H);
            s.mix_bias = Eigen::MatrixXd::Zero(H, 1);
        }
        p.sensors.push_back(std::move(s));
    }
    return p;
}

}  // namespace

DensityNet init_net(const DensityNetConfig& config, const ChannelSchema& schema) {
    config.validate();
    schema.validate();
    if (schema.channel_count() == 0) throw DataError("density-net: empty schema");
    DensityNet net;
    net.schema = schema;
    net.hidden_dim = config.hidden_dim;
    net.variance_floor = config.variance_floor;
    net.params = make_params(schema, config.hidden_dim);
    Rng rng(config.seed);
    for (auto* t : net.params.tensors()) {
        if (t->size() == 0) continue;
        if (t->cols() == 1) continue;  // biases start at zero
        const double bound = 1.0 / std::sqrt(static_cast<double>(t->cols()));
        for (Eigen::Index i = 0; i < t->size(); ++i)
            t->data()[i] = rng.uniform(-bound, bound);
    }
    return net;
}

LstmState zero_state(const DensityNet& net) {
    return {Eigen::VectorXd::Zero(net.hidden_dim), Eigen::VectorXd::Zero(net.hidden_dim)};
}

namespace {

/// Scores one entry. `x` is the encoding of the previous entry or null
/// for the first entry of a (sub)sequence, which is scored from the
/// incoming state without advancing the LSTM.
std::pair<LstmState, Eigen::VectorXd> forward_one(const DensityNet& net,
                                                  const LstmState& state,
                                                  const Eigen::VectorXd* x,
                                                  const LogEntry& entry,
                                                  StepCache* cache) {
    const NetParams& p = net.params;
    const int H = net.hidden_dim;
    LstmState next;
    StepCache local;
    StepCache& cc = cache ? *cache : local;
    cc.has_input = x != nullptr;
    if (x) {
        Eigen::VectorXd z = p.wx * (*x) + p.wh * state.h + p.b.col(0);
        cc.gi = sigmoid(z.segment(0, H));
        cc.gf = sigmoid(z.segment(H, H));
        cc.go = sigmoid(z.segment(2 * H, H));
        cc.gg = sigmoid(z.segment(3 * H, H));
        cc.c = cc.gf.cwiseProduct(state.c) + cc.gi.cwiseProduct(cc.gg);
        cc.hs = sigmoid(cc.c);
        cc.h = cc.go.cwiseProduct(cc.hs);
        if (cache) {
            cc.x = *x;
            cc.h_prev = state.h;
            cc.c_prev = state.c;
        }
    } else {
        cc.c = state.c;
        cc.h = state.h;
    }
    next.h = cc.h;
    next.c = cc.c;

    const int n = net.schema.actuator_count();
    const int m = net.schema.sensor_count();
    Eigen::VectorXd terms(n + m);
    Eigen::VectorXd ctx = cc.h;
    cc.act.resize(n);
    cc.sen.resize(m);
    for (int j = 0; j < n; ++j) {
        const auto& head = p.actuators[j];
        Eigen::VectorXd logits = head.proj * ctx + head.proj_bias.col(0);
        const double mx = logits.maxCoeff();
        const double lse = mx + std::log((logits.array() - mx).exp().sum());
        const int a = entry.actuator_values[j];
        terms[j] = lse - logits[a];
        auto& ac = cc.act[j];
        ac.ctx = ctx;
        ac.softmax = (logits.array() - lse).exp();
        ac.observed = a;
        if (!head.mix.empty()) {
            ac.nctx = sigmoid(head.mix[a] * ctx + head.mix_bias.col(0));
            ctx = ac.nctx;
        }
        if (!std::isfinite(terms[j]))
            throw NumericalError("non-finite outlier term for channel '" +
                                 net.schema.actuators[j].name + "'");
    }
    for (int k = 0; k < m; ++k) {
        const auto& head = p.sensors[k];
        auto& sc = cc.sen[k];
        sc.ctx = ctx;
        sc.u = sigmoid(head.fc * ctx + head.fc_bias.col(0));
        Eigen::Vector2d out = head.out * sc.u + head.out_bias.col(0);
        sc.mu = out[0];
        sc.pv = out[1];
        sc.var = softplus(sc.pv) + net.variance_floor;
        sc.s = entry.sensor_values[k];
        const double d = sc.s - sc.mu;
        terms[n + k] = 0.5 * (kLog2Pi + std::log(sc.var)) + d * d / (2.0 * sc.var);
        if (head.mix_bilinear.size() > 0) {
            sc.nctx = sigmoid(sc.s * (head.mix_bilinear * ctx) +
                              head.mix_linear * ctx + head.mix_bias.col(0));
            ctx = sc.nctx;
        }
        if (!std::isfinite(terms[n + k]))
            throw NumericalError("non-finite outlier term for channel '" +
                                 net.schema.sensors[k].name + "'");
    }
    return {std::move(next), std::move(terms)};
}

/// Backward through one cached step. d_h/d_c carry gradients from later
/// timesteps; the per-channel terms each have upstream gradient 1.
/// Returns gradients w.r.t. the incoming state.
void backward_one(const DensityNet& net, const StepCache& cc, Eigen::VectorXd& d_h,
                  Eigen::VectorXd& d_c, NetParams& g) {
    const NetParams& p = net.params;
    const int H = net.hidden_dim;
    const int n = net.schema.actuator_count();
    const int m = net.schema.sensor_count();

    Eigen::VectorXd d_ctx = Eigen::VectorXd::Zero(H);  // grad w.r.t. ctx after last mixing
    for (int k = m - 1; k >= 0; --k) {
        const auto& head = p.sensors[k];
        const auto& sc = cc.sen[k];
        auto& gh = g.sensors[k];
        Eigen::VectorXd d_ctx_here = Eigen::VectorXd::Zero(H);
        if (head.mix_bilinear.size() > 0) {
            Eigen::VectorXd d_pre =
                d_ctx.cwiseProduct(sc.nctx.cwiseProduct(Eigen::VectorXd::Ones(H) - sc.nctx));
            gh.mix_bilinear += sc.s * d_pre * sc.ctx.transpose();
            gh.mix_linear += d_pre * sc.ctx.transpose();
            gh.mix_bias.col(0) += d_pre;
            d_ctx_here += sc.s * (head.mix_bilinear.transpose() * d_pre) +
                          head.mix_linear.transpose() * d_pre;
        }
        // Gaussian negative log-density head.
        const double d = sc.s - sc.mu;
        const double d_mu = -d / sc.var;
        const double d_var = 0.5 / sc.var - d * d / (2.0 * sc.var * sc.var);
        const double d_pv = d_var * logistic(sc.pv);
        Eigen::Vector2d d_out(d_mu, d_pv);
        gh.out += d_out * sc.u.transpose();
        gh.out_bias.col(0) += d_out;
        Eigen::VectorXd d_u = head.out.transpose() * d_out;
        Eigen::VectorXd d_upre =
            d_u.cwiseProduct(sc.u.cwiseProduct(Eigen::VectorXd::Ones(H) - sc.u));
        gh.fc += d_upre * sc.ctx.transpose();
        gh.fc_bias.col(0) += d_upre;
        d_ctx_here += head.fc.transpose() * d_upre;
        d_ctx = d_ctx_here;
    }
    for (int j = n - 1; j >= 0; --j) {
        const auto& head = p.actuators[j];
        const auto& ac = cc.act[j];
        auto& gh = g.actuators[j];
        Eigen::VectorXd d_ctx_here = Eigen::VectorXd::Zero(H);
        if (!head.mix.empty()) {
            Eigen::VectorXd d_pre =
                d_ctx.cwiseProduct(ac.nctx.cwiseProduct(Eigen::VectorXd::Ones(H) - ac.nctx));
            gh.mix[ac.observed] += d_pre * ac.ctx.transpose();
            gh.mix_bias.col(0) += d_pre;
            d_ctx_here += head.mix[ac.observed].transpose() * d_pre;
        }
        Eigen::VectorXd d_logits = ac.softmax;
        d_logits[ac.observed] -= 1.0;
        gh.proj += d_logits * ac.ctx.transpose();
        gh.proj_bias.col(0) += d_logits;
        d_ctx_here += head.proj.transpose() * d_logits;
        d_ctx = d_ctx_here;
    }
    d_h += d_ctx;

    if (!cc.has_input) return;  // state passed through unchanged

    Eigen::VectorXd d_o = d_h.cwiseProduct(cc.hs);
    Eigen::VectorXd d_hs = d_h.cwiseProduct(cc.go);
    Eigen::VectorXd d_c_total =
        d_c + d_hs.cwiseProduct(cc.hs.cwiseProduct(Eigen::VectorXd::Ones(H) - cc.hs));
    Eigen::VectorXd d_f = d_c_total.cwiseProduct(cc.c_prev);
    Eigen::VectorXd d_i = d_c_total.cwiseProduct(cc.gg);
    Eigen::VectorXd d_g = d_c_total.cwiseProduct(cc.gi);

    Eigen::VectorXd d_z(4 * H);
    d_z.segment(0, H) =
        d_i.cwiseProduct(cc.gi.cwiseProduct(Eigen::VectorXd::Ones(H) - cc.gi));
    d_z.segment(H, H) =
        d_f.cwiseProduct(cc.gf.cwiseProduct(Eigen::VectorXd::Ones(H) - cc.gf));
    d_z.segment(2 * H, H) =
        d_o.cwiseProduct(cc.go.cwiseProduct(Eigen::VectorXd::Ones(H) - cc.go));
    d_z.segment(3 * H, H) =
        d_g.cwiseProduct(cc.gg.cwiseProduct(Eigen::VectorXd::Ones(H) - cc.gg));

    g.wx += d_z * cc.x.transpose();
    g.wh += d_z * cc.h_prev.transpose();
    g.b.col(0) += d_z;

    d_h = p.wh.transpose() * d_z;
    d_c = d_c_total.cwiseProduct(cc.gf);
}

void check_entry(const DensityNet& net, const LogEntry& e, std::size_t idx) {
    if (static_cast<int>(e.actuator_values.size()) != net.schema.actuator_count() ||
        static_cast<int>(e.sensor_values.size()) != net.schema.sensor_count())
        throw DataError("entry " + std::to_string(idx) + " does not match net schema");
}

}  // namespace

std::pair<LstmState, Eigen::VectorXd> forward_step(const DensityNet& net,
                                                   const LstmState& state,
                                                   const LogEntry* prev_entry,
                                                   const LogEntry& cur_entry) {
    check_entry(net, cur_entry, 0);
    if (prev_entry) {
        check_entry(net, *prev_entry, 0);
        const Eigen::VectorXd x = encode_entry(net.schema, *prev_entry);
        return forward_one(net, state, &x, cur_entry, nullptr);
    }
    return forward_one(net, state, nullptr, cur_entry, nullptr);
}

ScoreTrace outlier_factors(const DensityNet& net, const Log& log) {
    if (!(log.schema == net.schema))
        throw DataError("outlier_factors: log schema does not match net schema");
    ScoreTrace trace;
    const std::size_t T = log.size();
    trace.factors.resize(T);
    trace.breakdown.resize(static_cast<Eigen::Index>(T), net.schema.channel_count());
    LstmState state = zero_state(net);
    for (std::size_t i = 0; i < T; ++i) {
        const LogEntry* prev = i == 0 ? nullptr : &log.entries[i - 1];
        auto [next, terms] = forward_step(net, state, prev, log.entries[i]);
        state = std::move(next);
        trace.breakdown.row(static_cast<Eigen::Index>(i)) = terms.transpose();
        trace.factors[i] = terms.sum();
    }
    return trace;
}

namespace {

struct Adam {
    NetParams m, v;
    double lr, beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
    long step = 0;

    Adam(const NetParams& shape, double lr_)
        : m(NetParams::zeros_like(shape)), v(NetParams::zeros_like(shape)), lr(lr_) {}

    void update(NetParams& params, const NetParams& grads) {
        ++step;
        const double bc1 = 1.0 - std::pow(beta1, step);
        const double bc2 = 1.0 - std::pow(beta2, step);
        auto pt = params.tensors();
        auto gt = grads.tensors();
        auto mt = m.tensors();
        auto vt = v.tensors();
        for (std::size_t i = 0; i < pt.size(); ++i) {
            if (pt[i]->size() == 0) continue;
            auto& M = *mt[i];
            auto& V = *vt[i];
            const auto& G = *gt[i];
            M = beta1 * M + (1.0 - beta1) * G;
            V = beta2 * V.array().matrix() +
                (1.0 - beta2) * G.array().square().matrix();
            pt[i]->array() -=
                lr * (M.array() / bc1) / ((V.array() / bc2).sqrt() + eps);
        }
    }
};

}  // namespace

TrainResult train(const DensityNetConfig& config, const Log& train_log) {
    config.validate();
    train_log.validate();
    for (std::size_t i = 0; i < train_log.size(); ++i)
        if (train_log.entries[i].label.kind != LabelKind::Normal)
            throw DataError("train: entry " + std::to_string(i) + " is not Normal");
    const long T = static_cast<long>(train_log.size());
    if (T < static_cast<long>(config.batch_size) * config.truncation_len)
        throw DataError("train: log length " + std::to_string(T) +
                        " < batch_size * truncation_len");

    const NormStats stats = compute_norm_stats(train_log);
    const Log norm = normalize(train_log, stats);
    DensityNet net = init_net(config, norm.schema);
    net.train_stats = stats;

    std::vector<Eigen::VectorXd> enc(T);
    for (long t = 0; t < T; ++t) enc[t] = encode_entry(net.schema, norm.entries[t]);

    const long B = config.batch_size;
    const long chunk_len = T / B;
    Adam opt(net.params, config.learning_rate);
    TrainResult result;

    std::vector<LstmState> states(B);
    std::vector<StepCache> caches(config.truncation_len);
    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        for (long b = 0; b < B; ++b) states[b] = zero_state(net);
        double total_cost = 0.0;
        long scored = 0;
        for (long seg = 0; seg < chunk_len; seg += config.truncation_len) {
            const long seg_len = std::min<long>(config.truncation_len, chunk_len - seg);
            NetParams grads = NetParams::zeros_like(net.params);
            for (long b = 0; b < B; ++b) {  // fixed accumulation order
                LstmState state = states[b];
                for (long t = 0; t < seg_len; ++t) {
                    const long gt = b * chunk_len + seg + t;
                    const bool chunk_start = (seg == 0 && t == 0);
                    const Eigen::VectorXd* x = chunk_start ? nullptr : &enc[gt - 1];
                    try {
                        auto [next, terms] =
                            forward_one(net, state, x, norm.entries[gt], &caches[t]);
                        state = std::move(next);
                        total_cost += terms.sum();
                    } catch (const NumericalError& e) {
                        throw NumericalError("train: epoch " + std::to_string(epoch) +
                                             ", entry " + std::to_string(gt) + ": " +
                                             e.what());
                    }
                    ++scored;
                }
                Eigen::VectorXd d_h = Eigen::VectorXd::Zero(net.hidden_dim);
                Eigen::VectorXd d_c = Eigen::VectorXd::Zero(net.hidden_dim);
                for (long t = seg_len - 1; t >= 0; --t)
                    backward_one(net, caches[t], d_h, d_c, grads);
                states[b] = state;  // detached across the segment boundary
            }
            opt.update(net.params, grads);
        }
        if (!std::isfinite(total_cost))
            throw NumericalError("train: non-finite cost in epoch " +
                                 std::to_string(epoch));
        result.epoch_mean_cost.push_back(total_cost / static_cast<double>(scored));
    }
    result.net = std::move(net);
    return result;
}

double gradient_check(const DensityNetConfig& config, const Log& tiny_log,
                      double fd_step) {
    tiny_log.validate();
    if (tiny_log.empty()) throw DataError("gradient_check: empty log");
    DensityNet net = init_net(config, tiny_log.schema);

    const long T = static_cast<long>(tiny_log.size());
    std::vector<Eigen::VectorXd> enc(T);
    for (long t = 0; t < T; ++t)
        enc[t] = encode_entry(net.schema, tiny_log.entries[t]);

    auto cost_of = [&](const DensityNet& n) {
        double c = 0.0;
        LstmState state = zero_state(n);
        for (long t = 0; t < T; ++t) {
            const Eigen::VectorXd* x = t == 0 ? nullptr : &enc[t - 1];
            auto [next, terms] = forward_one(n, state, x, tiny_log.entries[t], nullptr);
            state = std::move(next);
            c += terms.sum();
        }
        return c;
    };

    // Analytic gradient: one full-length BPTT pass.
    NetParams grads = NetParams::zeros_like(net.params);
    {
        std::vector<StepCache> caches(T);
        LstmState state = zero_state(net);
        for (long t = 0; t < T; ++t) {
            const Eigen::VectorXd* x = t == 0 ? nullptr : &enc[t - 1];
            auto [next, terms] = forward_one(net, state, x, tiny_log.entries[t], &caches[t]);
            state = std::move(next);
        }
        Eigen::VectorXd d_h = Eigen::VectorXd::Zero(net.hidden_dim);
        Eigen::VectorXd d_c = Eigen::VectorXd::Zero(net.hidden_dim);
        for (long t = T - 1; t >= 0; --t) backward_one(net, caches[t], d_h, d_c, grads);
    }

    double max_rel = 0.0;
    auto pt = net.params.tensors();
    auto gt = grads.tensors();
    for (std::size_t i = 0; i < pt.size(); ++i) {
        for (Eigen::Index e = 0; e < pt[i]->size(); ++e) {
            double& w = pt[i]->data()[e];
            const double orig = w;
            w = orig + fd_step;
            const double cp = cost_of(net);
            w = orig - fd_step;
            const double cm = cost_of(net);
            w = orig;
            const double fd = (cp - cm) / (2.0 * fd_step);
            const double an = gt[i]->data()[e];
            const double rel =
                std::abs(fd - an) / std::max(std::abs(fd) + std::abs(an), 1e-3);
            max_rel = std::max(max_rel, rel);
        }
    }
    return max_rel;
}

namespace {

constexpr char kMagic[9] = "WTADNET1";

void write_bytes(std::ostream& out, const void* p, std::size_t len) {
    out.write(static_cast<const char*>(p), static_cast<std::streamsize>(len));
}

void read_bytes(std::istream& in, void* p, std::size_t len) {
    in.read(static_cast<char*>(p), static_cast<std::streamsize>(len));
    if (!in) throw DataError("model file truncated or corrupted");
}

}  // namespace

void save_net(const DensityNet& net, const std::filesystem::path& path,
              const std::string& created_stamp) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write model '" + path.string() + "'");
    nlohmann::json header;
    header["version"] = 1;
    header["created"] = created_stamp;
    header["hidden_dim"] = net.hidden_dim;
    header["variance_floor"] = net.variance_floor;
    header["schema"] = schema_to_json(net.schema);
    header["stats"] = {{"mean", net.train_stats.mean},
                       {"variance", net.train_stats.variance}};
    const std::string hs = header.dump();
    write_bytes(out, kMagic, 8);
    const std::uint32_t hlen = static_cast<std::uint32_t>(hs.size());
    write_bytes(out, &hlen, 4);
    write_bytes(out, hs.data(), hs.size());
    const auto tensors = net.params.tensors();
    const std::uint32_t count = static_cast<std::uint32_t>(tensors.size());
    write_bytes(out, &count, 4);
    for (const auto* t : tensors) {
        const std::uint32_t rows = static_cast<std::uint32_t>(t->rows());
        const std::uint32_t cols = static_cast<std::uint32_t>(t->cols());
        write_bytes(out, &rows, 4);
        write_bytes(out, &cols, 4);
        write_bytes(out, t->data(), sizeof(double) * static_cast<std::size_t>(t->size()));
    }
    if (!out) throw DataError("I/O error writing model '" + path.string() + "'");
}

DensityNet load_net(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open model '" + path.string() + "'");
    char magic[8];
    read_bytes(in, magic, 8);
    if (std::memcmp(magic, kMagic, 8) != 0)
        throw DataError("'" + path.string() + "' is not a density-net model file");
    std::uint32_t hlen = 0;
    read_bytes(in, &hlen, 4);
    if (hlen > (1u << 20)) throw DataError("model header corrupted");
    std::string hs(hlen, '\0');
    read_bytes(in, hs.data(), hlen);
    DensityNet net;
    try {
        const nlohmann::json header = nlohmann::json::parse(hs);
        if (header.at("version").get<int>() != 1)
            throw DataError("unsupported model version");
        net.hidden_dim = header.at("hidden_dim").get<int>();
        net.variance_floor = header.at("variance_floor").get<double>();
        net.schema = schema_from_json(header.at("schema"));
        net.train_stats.mean = header.at("stats").at("mean").get<std::vector<double>>();
        net.train_stats.variance =
            header.at("stats").at("variance").get<std::vector<double>>();
    } catch (const nlohmann::json::exception& e) {
        throw DataError("model header corrupted: " + std::string(e.what()));
    }
    if (net.hidden_dim < 1 ||
        net.train_stats.sensor_count() != net.schema.sensor_count())
        throw DataError("model header inconsistent");
    net.params = make_params(net.schema, net.hidden_dim);
    std::uint32_t count = 0;
    read_bytes(in, &count, 4);
    auto tensors = net.params.tensors();
    if (count != tensors.size()) throw DataError("model tensor count mismatch");
    for (auto* t : tensors) {
        std::uint32_t rows = 0, cols = 0;
        read_bytes(in, &rows, 4);
        read_bytes(in, &cols, 4);
        if (rows != static_cast<std::uint32_t>(t->rows()) ||
            cols != static_cast<std::uint32_t>(t->cols()))
            throw DataError("model tensor shape mismatch");
        read_bytes(in, t->data(), sizeof(double) * static_cast<std::size_t>(t->size()));
    }
    return net;
}

}  // namespace wtad
