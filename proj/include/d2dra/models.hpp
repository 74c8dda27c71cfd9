// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "d2dra/channel.hpp"
#include "d2dra/config.hpp"
#include "d2dra/nn/basic_module.hpp"
#include "d2dra/objective.hpp"
#include "d2dra/stats.hpp"

namespace d2dra {

using nn::Matrix;
using nn::Mode;

/// Depth, width, and dropout shared by every basic module of a model.
struct ArchConfig {
    int units = 16;
    int width = 400;
    double dropout_rate = 0.05;

    bool operator==(const ArchConfig&) const = default;
};

struct ModelDims {
    int n_tps = 0;
    int n_channels = 0;
    int n_power_levels = 0;
    int bf_bits = 0;
    int bb_bits = 0;

    static ModelDims from(const SystemConfig& config);
    int tensor_size() const { return n_channels * (n_tps + 1) * (n_tps + 1); }
    int local_size() const { return n_channels * (n_tps + 1); }
    bool operator==(const ModelDims&) const = default;
};

/// Relaxed outputs for a batch, one column per sample. Row layout matches
/// SoftOutputs: power is N blocks of N_P, channel N blocks of K, feedback
/// N blocks of B_F, bs one block of B_B.
struct BatchSoft {
    Matrix power;
    Matrix channel;
    Matrix feedback;
    Matrix bs;

    SoftOutputs column(Eigen::Index c, const ModelDims& dims) const;
};

/// Normalized full tensors as network input, one column per sample.
Matrix normalized_batch(std::span<const ChannelSample> samples, const DatasetStats& stats);

/// Argmax per block with ties to the smallest index, then canonicalized.
Allocation argmax_allocation(const Matrix& power_scores, const Matrix& channel_scores, Eigen::Index col,
                             const ModelDims& dims);

class CentralizedModel {
public:
    CentralizedModel() = default;
    CentralizedModel(const ModelDims& dims, const ArchConfig& arch, DatasetStats stats);

    void init(Rng& rng);

    /// Softmax outputs; Train mode uses batch statistics and dropout.
    BatchSoft forward(const Matrix& x, Mode mode, Rng* rng = nullptr);
    BatchSoft forward_infer(const Matrix& x) const;
    /// Backpropagates gradients w.r.t. the softmax outputs of the last
    /// train-mode forward into the parameter gradients.
    void backward(const BatchSoft& grads);

    Allocation decide(const ChannelSample& sample) const;
    Allocation decide_normalized(std::span<const double> x) const;
    std::vector<Allocation> decide_batch(const Matrix& x) const;
    SoftOutputs soft(const ChannelSample& sample) const;

    void zero_grad();
    std::vector<nn::Param> parameters();
    std::vector<nn::Buffer> buffers();

    const ModelDims& dims() const { return dims_; }
    const ArchConfig& arch() const { return arch_; }
    const DatasetStats& stats() const { return stats_; }
    nn::BasicModule& bdp() { return bdp_; }
    nn::BasicModule& bdc() { return bdc_; }

private:
    ModelDims dims_;
    ArchConfig arch_;
    DatasetStats stats_;
    nn::BasicModule bdp_;  // power levels, N softmax blocks of N_P
    nn::BasicModule bdc_;  // channel selection, N softmax blocks of K
    BatchSoft last_;
};

/// Hard-mode output of one distributed round.
struct DistributedDecision {
    Allocation allocation;
    std::vector<std::vector<std::uint8_t>> feedback_bits;  // b_i, N x B_F
    std::vector<std::uint8_t> bs_bits;                     // b_0, B_B
};

/// Per-TP feedback encoder (BDF), BS notification encoder (BDN), and
/// per-TP power/channel modules (BDP/BDC) fed with local CSI plus b_0.
class DistributedModel {
public:
    DistributedModel() = default;
    DistributedModel(const ModelDims& dims, const ArchConfig& arch, DatasetStats stats);

    void init(Rng& rng);

    /// End-to-end relaxed forward with continuous feedback values.
    BatchSoft forward(const Matrix& x, Mode mode, Rng* rng = nullptr);
    BatchSoft forward_infer(const Matrix& x) const;
    void backward(const BatchSoft& grads);

    // The three protocol phases, inference mode. Each takes only what the
    // corresponding node can know.
    /// TP side: sigmoid feedback values b_i from TP `tp`'s normalized local CSI.
    Matrix encode_feedback(int tp, const Matrix& local) const;
    /// BS side: sigmoid notification values b_0 from the BS local CSI and
    /// the (binarized, in hard mode) feedback of every TP, stacked.
    Matrix notify(const Matrix& bs_local, const Matrix& feedback) const;
    /// TP side: power and channel probabilities from local CSI and b_0.
    std::pair<Matrix, Matrix> decide_tp(int tp, const Matrix& local, const Matrix& notification) const;

    /// Hard mode: thresholds b_i and b_0 at 0.5, then argmax-canonicalizes.
    DistributedDecision decide(const ChannelSample& sample) const;
    SoftOutputs soft(const ChannelSample& sample) const;

    void zero_grad();
    std::vector<nn::Param> parameters();
    std::vector<nn::Buffer> buffers();

    const ModelDims& dims() const { return dims_; }
    const ArchConfig& arch() const { return arch_; }
    const DatasetStats& stats() const { return stats_; }

    /// Bits exchanged per round: N B_F uplink plus B_B broadcast.
    int payload_bits() const { return dims_.n_tps * dims_.bf_bits + dims_.bb_bits; }

    nn::BasicModule& bdf(int tp) { return bdf_.at(tp); }
    nn::BasicModule& bdn() { return bdn_; }
    nn::BasicModule& bdp(int tp) { return bdp_.at(tp); }
    nn::BasicModule& bdc(int tp) { return bdc_.at(tp); }

private:
    Matrix gather_rows(const Matrix& x, int rx) const;

    ModelDims dims_;
    ArchConfig arch_;
    DatasetStats stats_;
    std::vector<std::vector<std::size_t>> local_rows_;  // index 0 = BS
    std::vector<nn::BasicModule> bdf_;
    nn::BasicModule bdn_;
    std::vector<nn::BasicModule> bdp_;
    std::vector<nn::BasicModule> bdc_;
    BatchSoft last_;
};

/// Normalized local view of node `rx` (0 = BS), built from that node's
/// gains only.
Matrix normalized_local(const ChannelSample& sample, const DatasetStats& stats, int rx);

/// Thresholds at 0.5 (values >= 0.5 map to 1).
Matrix binarize(const Matrix& values);

// Model bundle: a manifest block (magic "D2DMB\0\1\0", u32 byte length,
// `key = value` lines) followed by a parameter file that also carries the
// preprocessing statistics.

enum class ModelKind { Centralized, Distributed };

std::map<std::string, std::string> read_manifest(const std::filesystem::path& path);
ModelKind bundle_kind(const std::filesystem::path& path);

void save_bundle(const std::filesystem::path& path, CentralizedModel& model,
                 const std::map<std::string, std::string>& extra = {});
void save_bundle(const std::filesystem::path& path, DistributedModel& model,
                 const std::map<std::string, std::string>& extra = {});
CentralizedModel load_centralized(const std::filesystem::path& path);
DistributedModel load_distributed(const std::filesystem::path& path);

std::uint64_t stats_checksum(const DatasetStats& stats);

}  // namespace d2dra
