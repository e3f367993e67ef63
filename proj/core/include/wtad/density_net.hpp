#ifndef WTAD_DENSITY_NET_HPP
#define WTAD_DENSITY_NET_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "wtad/log.hpp"

namespace wtad {

struct DensityNetConfig {
    int hidden_dim = 100;
    int truncation_len = 100;  // gradient step / unchain interval
    int batch_size = 10;       // number of contiguous chunks trained in parallel
    double learning_rate = 1e-3;
    int epochs = 10;
    double variance_floor = 1e-4;
    std::uint64_t seed = 0;

    void validate() const;
};

/// Parameters of the recurrent density estimator. An LSTM (sigmoid
/// activations throughout) encodes the previous entries; within a
/// timestep, channels are scored in schema order, and after each channel
/// its true value is bilinearly mixed into the context used by the next
/// channel. Actuator heads project the context to position logits;
/// sensor heads run one fully-connected layer and project to
/// (mean, pre-variance), with variance = softplus(pre-variance) + floor.
struct NetParams {
    // LSTM gate order: input, forget, output, candidate. wx is 4H x D,
    // wh is 4H x H, b is 4H x 1.
    Eigen::MatrixXd wx, wh, b;

    struct ActuatorHead {
        Eigen::MatrixXd proj;       // arity x H
        Eigen::MatrixXd proj_bias;  // arity x 1
        // Bilinear mixer: one H x H slice per position (the one-hot input
        // selects a slice). Empty for the last channel, which has no
        // successor to feed.
        std::vector<Eigen::MatrixXd> mix;
        Eigen::MatrixXd mix_bias;  // H x 1
    };
    struct SensorHead {
        Eigen::MatrixXd fc, fc_bias;    // H x H, H x 1
        Eigen::MatrixXd out, out_bias;  // 2 x H, 2 x 1 (rows: mean, pre-variance)
        // Mixer: sigma(s * (mix_bilinear * ctx) + mix_linear * ctx + mix_bias).
        // The linear term keeps the mixed context informative near s = 0.
        Eigen::MatrixXd mix_bilinear, mix_linear, mix_bias;
    };
    std::vector<ActuatorHead> actuators;
    std::vector<SensorHead> sensors;

    std::vector<Eigen::MatrixXd*> tensors();
    std::vector<const Eigen::MatrixXd*> tensors() const;
    static NetParams zeros_like(const NetParams& shape);
};

struct DensityNet {
    ChannelSchema schema;
    int hidden_dim = 0;
    double variance_floor = 1e-4;
    NormStats train_stats;  // stats the training log was normalized with
    NetParams params;

    int input_dim() const { return schema.arity_sum() + schema.sensor_count(); }
};

struct LstmState {
    Eigen::VectorXd h, c;
};
LstmState zero_state(const DensityNet& net);

/// Per-entry outlier factors plus the per-channel negative log-probability
/// breakdown (entries x channels); each factor is its breakdown row sum.
struct ScoreTrace {
    std::vector<double> factors;
    Eigen::MatrixXd breakdown;
};

/// Advances the LSTM over prev_entry (pass nullptr for the first log
/// entry, which is scored from the zero initial state) and returns the new
/// state plus the per-channel negative log-probabilities of cur_entry.
/// Sensor values must already be normalized with the training stats.
std::pair<LstmState, Eigen::VectorXd> forward_step(const DensityNet& net,
                                                   const LstmState& state,
                                                   const LogEntry* prev_entry,
                                                   const LogEntry& cur_entry);

/// Folds forward_step over the log. Entry i conditions on entries 0..i-1.
ScoreTrace outlier_factors(const DensityNet& net, const Log& log);

struct TrainResult {
    DensityNet net;
    std::vector<double> epoch_mean_cost;  // mean per-entry cost per epoch
};

/// Trains on a normal-only log: the log is split into batch_size
/// contiguous chunks stepped in parallel; an Adam step is taken every
/// truncation_len entries with backpropagation unchained at the segment
/// boundary. The log is normalized internally with its own stats, which
/// are stored in the returned net.
TrainResult train(const DensityNetConfig& config, const Log& train_log);

/// Randomly initialized net (uniform +-1/sqrt(fan_in), seeded).
DensityNet init_net(const DensityNetConfig& config, const ChannelSchema& schema);

/// Central finite differences (step 1e-5) against the analytic gradient
/// for every parameter; returns the max relative error. Intended for
/// hidden_dim <= 8 and logs <= 30 entries.
double gradient_check(const DensityNetConfig& config, const Log& tiny_log,
                      double fd_step = 1e-5);

void save_net(const DensityNet& net, const std::filesystem::path& path,
              const std::string& created_stamp = "0");
DensityNet load_net(const std::filesystem::path& path);

}  // namespace wtad

#endif
