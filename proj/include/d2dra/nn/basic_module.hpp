// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include "d2dra/nn/layers.hpp"
#include "d2dra/rng.hpp"

namespace d2dra::nn {

struct BasicModuleSpec {
    int n_inputs = 1;
    int n_outputs = 1;
    int n_units = 1;       // N_L
    int hidden_width = 1;  // N_N
    double dropout_rate = 0.05;
    // When false the last unit stops after BN (+ residual): no ReLU, no
    // dropout. The allocation networks use this so logits can go negative.
    bool activate_output = true;

    void validate() const;
    bool operator==(const BasicModuleSpec&) const = default;
};

/// N_L basic units (FC -> BN -> ReLU -> dropout) in sequence. The first
/// unit's output is added to the BN output of every later unit whose width
/// matches it, before the ReLU.
class BasicModule {
public:
    BasicModule() = default;
    explicit BasicModule(const BasicModuleSpec& spec);

    void init(Rng& rng);

    /// Train mode uses batch statistics and, with a nonzero rate, draws
    /// dropout masks from `rng`. Infer mode is deterministic and ignores rng.
    Matrix forward(const Matrix& x, Mode mode, Rng* rng = nullptr);
    Matrix forward_infer(const Matrix& x) const;

    /// Backward pass for the most recent train-mode forward.
    Matrix backward(const Matrix& dy);

    void zero_grad();
    std::vector<Param> parameters(const std::string& prefix);
    std::vector<Buffer> buffers(const std::string& prefix);

    const BasicModuleSpec& spec() const { return spec_; }
    int n_units() const { return static_cast<int>(units_.size()); }
    bool has_residual(int unit) const { return units_.at(unit).residual; }

    Dense& fc(int unit) { return units_.at(unit).fc; }
    BatchNorm& bn(int unit) { return units_.at(unit).bn; }

private:
    struct Unit {
        Dense fc;
        BatchNorm bn;
        bool activate = true;
        bool residual = false;
        Matrix pre_activation;
        Matrix mask;  // empty when dropout was not applied
    };

    BasicModuleSpec spec_;
    std::vector<Unit> units_;
};

}  // namespace d2dra::nn
