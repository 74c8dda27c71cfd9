// SPDX-License-Identifier: Apache-2.0
#include "d2dra/nn/basic_module.hpp"

#include "d2dra/errors.hpp"

namespace d2dra::nn {

void BasicModuleSpec::validate() const
{
    if (n_units < 1)
        throw ConfigError("basic module needs at least one unit");
    if (n_inputs < 1 || n_outputs < 1 || hidden_width < 1)
        throw ConfigError("basic module widths must be >= 1");
    if (!(dropout_rate >= 0.0 && dropout_rate < 1.0))
        throw ConfigError("dropout rate must lie in [0, 1)");
}

BasicModule::BasicModule(const BasicModuleSpec& spec) : spec_(spec)
{
    spec.validate();
    const int first_width = spec.n_units == 1 ? spec.n_outputs : spec.hidden_width;
    int in = spec.n_inputs;
    for (int u = 0; u < spec.n_units; ++u) {
        const bool last = u == spec.n_units - 1;
        const int width = last ? spec.n_outputs : spec.hidden_width;
        Unit unit;
        unit.fc = Dense(in, width);
        unit.bn = BatchNorm(width);
        unit.activate = !last || spec.activate_output;
        unit.residual = u > 0 && width == first_width;
        units_.push_back(std::move(unit));
        in = width;
    }
}

void BasicModule::init(Rng& rng)
{
    for (auto& u : units_)
        u.fc.init(rng);
}

Matrix BasicModule::forward(const Matrix& x, Mode mode, Rng* rng)
{
    if (mode == Mode::Infer)
        return forward_infer(x);
    if (x.rows() != spec_.n_inputs)
        throw ShapeMismatch("basic module input width mismatch");

    Matrix h = x;
    Matrix first;
    for (std::size_t u = 0; u < units_.size(); ++u) {
        Unit& unit = units_[u];
        Matrix z = unit.bn.forward(unit.fc.forward(h), Mode::Train);
        if (unit.residual)
            z += first;
        unit.pre_activation = z;
        unit.mask.resize(0, 0);
        if (unit.activate) {
            h = relu(z);
            if (spec_.dropout_rate > 0.0) {
                if (rng == nullptr)
                    throw std::invalid_argument("dropout in train mode needs a random stream");
                unit.mask = dropout_mask(h.rows(), h.cols(), spec_.dropout_rate, *rng);
                h = h.cwiseProduct(unit.mask);
            }
        } else {
            h = std::move(z);
        }
        if (u == 0)
            first = h;
    }
    return h;
}

Matrix BasicModule::forward_infer(const Matrix& x) const
{
    if (x.rows() != spec_.n_inputs)
        throw ShapeMismatch("basic module input width mismatch");
    Matrix h = x;
    Matrix first;
    for (std::size_t u = 0; u < units_.size(); ++u) {
        const Unit& unit = units_[u];
        Matrix z = unit.bn.forward_infer(unit.fc.forward_infer(h));
        if (unit.residual)
            z += first;
        h = unit.activate ? relu(z) : std::move(z);
        if (u == 0)
            first = h;
    }
    return h;
}

Matrix BasicModule::backward(const Matrix& dy)
{
    Matrix d_out = dy;
    Matrix d_first;  // gradient reaching unit 0's output through the shortcuts
    for (std::size_t u = units_.size(); u-- > 0;) {
        Unit& unit = units_[u];
        if (u == 0 && d_first.size() != 0)
            d_out += d_first;
        Matrix dz;
        if (unit.activate) {
            if (unit.mask.size() != 0)
                d_out = d_out.cwiseProduct(unit.mask);
            dz = relu_backward(d_out, unit.pre_activation);
        } else {
            dz = std::move(d_out);
        }
        if (unit.residual) {
            if (d_first.size() == 0)
                d_first = dz;
            else
                d_first += dz;
        }
        d_out = unit.fc.backward(unit.bn.backward(dz));
    }
    return d_out;
}

void BasicModule::zero_grad()
{
    for (auto& u : units_) {
        u.fc.d_weight.setZero();
        u.fc.d_bias.setZero();
        u.bn.d_scale.setZero();
        u.bn.d_shift.setZero();
    }
}

std::vector<Param> BasicModule::parameters(const std::string& prefix)
{
    std::vector<Param> out;
    for (std::size_t u = 0; u < units_.size(); ++u) {
        const std::string p = prefix + ".unit" + std::to_string(u);
        auto& unit = units_[u];
        out.push_back({p + ".fc.weight", &unit.fc.weight, &unit.fc.d_weight});
        out.push_back({p + ".fc.bias", &unit.fc.bias, &unit.fc.d_bias});
        out.push_back({p + ".bn.scale", &unit.bn.scale, &unit.bn.d_scale});
        out.push_back({p + ".bn.shift", &unit.bn.shift, &unit.bn.d_shift});
    }
    return out;
}

std::vector<Buffer> BasicModule::buffers(const std::string& prefix)
{
    std::vector<Buffer> out;
    for (std::size_t u = 0; u < units_.size(); ++u) {
        const std::string p = prefix + ".unit" + std::to_string(u);
        out.push_back({p + ".bn.running_mean", &units_[u].bn.running_mean});
        out.push_back({p + ".bn.running_var", &units_[u].bn.running_var});
    }
    return out;
}

}  // namespace d2dra::nn
