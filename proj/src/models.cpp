// SPDX-License-Identifier: Apache-2.0
#include "d2dra/models.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "d2dra/binary_io.hpp"
#include "d2dra/dataset_io.hpp"
#include "d2dra/errors.hpp"
#include "d2dra/nn/tensor_io.hpp"

namespace d2dra {

using nn::BasicModuleSpec;

namespace {

BasicModuleSpec module_spec(int n_in, int n_out, const ArchConfig& arch)
{
    BasicModuleSpec s;
    s.n_inputs = n_in;
    s.n_outputs = n_out;
    s.n_units = arch.units;
    s.hidden_width = arch.width;
    s.dropout_rate = arch.dropout_rate;
    s.activate_output = false;
    return s;
}

void check_stats(const ModelDims& dims, const DatasetStats& stats)
{
    if (stats.n_tps != dims.n_tps || stats.n_channels != dims.n_channels ||
        stats.mean_log10.size() != static_cast<std::size_t>(dims.tensor_size()))
        throw ShapeMismatch("preprocessing statistics do not match model dimensions");
}

Matrix stacked(const std::vector<Matrix>& parts)
{
    Eigen::Index rows = 0;
    for (const auto& p : parts)
        rows += p.rows();
    Matrix out(rows, parts.front().cols());
    Eigen::Index r = 0;
    for (const auto& p : parts) {
        out.middleRows(r, p.rows()) = p;
        r += p.rows();
    }
    return out;
}

// first index among maxima
template <typename Vec>
int argmax(const Vec& v)
{
    int best = 0;
    for (Eigen::Index r = 1; r < v.size(); ++r)
        if (v(r) > v(best))
            best = static_cast<int>(r);
    return best;
}

Matrix to_column(std::span<const double> v)
{
    return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

}  // namespace

ModelDims ModelDims::from(const SystemConfig& c)
{
    return {c.n_tps, c.n_channels, c.n_power_levels, c.bf_bits, c.bb_bits};
}

SoftOutputs BatchSoft::column(Eigen::Index c, const ModelDims& dims) const
{
    SoftOutputs s;
    s.n_tps = dims.n_tps;
    s.n_power_levels = dims.n_power_levels;
    s.n_channels = dims.n_channels;
    auto copy = [c](const Matrix& m) {
        std::vector<double> v(static_cast<std::size_t>(m.rows()));
        for (Eigen::Index r = 0; r < m.rows(); ++r)
            v[r] = m(r, c);
        return v;
    };
    s.power_probs = copy(power);
    s.channel_probs = copy(channel);
    if (feedback.size() != 0)
        s.feedback_soft = copy(feedback);
    if (bs.size() != 0)
        s.bs_soft = copy(bs);
    return s;
}

Matrix normalized_batch(std::span<const ChannelSample> samples, const DatasetStats& stats)
{
    const Eigen::Index dim = static_cast<Eigen::Index>(stats.mean_log10.size());
    Matrix x(dim, static_cast<Eigen::Index>(samples.size()));
    for (std::size_t s = 0; s < samples.size(); ++s)
        preprocess_into(samples[s], stats, std::span<double>(x.col(static_cast<Eigen::Index>(s)).data(), dim));
    return x;
}

Allocation argmax_allocation(const Matrix& power_scores, const Matrix& channel_scores, Eigen::Index col,
                             const ModelDims& dims)
{
    Allocation a = Allocation::idle(dims.n_tps);
    for (int i = 0; i < dims.n_tps; ++i) {
        a.power_idx[i] = argmax(power_scores.col(col).segment(i * dims.n_power_levels, dims.n_power_levels));
        a.channel_idx[i] = argmax(channel_scores.col(col).segment(i * dims.n_channels, dims.n_channels));
    }
    a.canonicalize();
    return a;
}

Matrix normalized_local(const ChannelSample& sample, const DatasetStats& stats, int rx)
{
    const auto idx = sample.local_indices(rx);
    Matrix out(static_cast<Eigen::Index>(idx.size()), 1);
    for (std::size_t e = 0; e < idx.size(); ++e)
        out(static_cast<Eigen::Index>(e), 0) =
            (std::log10(sample.gains()[idx[e]]) - stats.mean_log10[idx[e]]) / stats.std_log10[idx[e]];
    return out;
}

Matrix binarize(const Matrix& values)
{
    return (values.array() >= 0.5).cast<double>();
}

// ---------------------------------------------------------------------------
// Centralized

CentralizedModel::CentralizedModel(const ModelDims& dims, const ArchConfig& arch, DatasetStats stats)
    : dims_(dims), arch_(arch), stats_(std::move(stats)),
      bdp_(module_spec(dims.tensor_size(), dims.n_power_levels * dims.n_tps, arch)),
      bdc_(module_spec(dims.tensor_size(), dims.n_channels * dims.n_tps, arch))
{
    check_stats(dims_, stats_);
}

void CentralizedModel::init(Rng& rng)
{
    bdp_.init(rng);
    bdc_.init(rng);
}

BatchSoft CentralizedModel::forward(const Matrix& x, Mode mode, Rng* rng)
{
    if (mode == Mode::Infer)
        return forward_infer(x);
    last_.power = nn::softmax_blocks(bdp_.forward(x, mode, rng), dims_.n_power_levels);
    last_.channel = nn::softmax_blocks(bdc_.forward(x, mode, rng), dims_.n_channels);
    return last_;
}

BatchSoft CentralizedModel::forward_infer(const Matrix& x) const
{
    BatchSoft out;
    out.power = nn::softmax_blocks(bdp_.forward_infer(x), dims_.n_power_levels);
    out.channel = nn::softmax_blocks(bdc_.forward_infer(x), dims_.n_channels);
    return out;
}

void CentralizedModel::backward(const BatchSoft& grads)
{
    bdp_.backward(nn::softmax_blocks_backward(grads.power, last_.power, dims_.n_power_levels));
    bdc_.backward(nn::softmax_blocks_backward(grads.channel, last_.channel, dims_.n_channels));
}

Allocation CentralizedModel::decide_normalized(std::span<const double> x) const
{
    const Matrix input = to_column(x);
    // softmax is monotone, so argmax over logits is the same decision
    return argmax_allocation(bdp_.forward_infer(input), bdc_.forward_infer(input), 0, dims_);
}

Allocation CentralizedModel::decide(const ChannelSample& sample) const
{
    return decide_normalized(preprocess(sample, stats_));
}

std::vector<Allocation> CentralizedModel::decide_batch(const Matrix& x) const
{
    const Matrix p = bdp_.forward_infer(x);
    const Matrix c = bdc_.forward_infer(x);
    std::vector<Allocation> out;
    out.reserve(static_cast<std::size_t>(x.cols()));
    for (Eigen::Index col = 0; col < x.cols(); ++col)
        out.push_back(argmax_allocation(p, c, col, dims_));
    return out;
}

SoftOutputs CentralizedModel::soft(const ChannelSample& sample) const
{
    return forward_infer(to_column(preprocess(sample, stats_))).column(0, dims_);
}

void CentralizedModel::zero_grad()
{
    bdp_.zero_grad();
    bdc_.zero_grad();
}

std::vector<nn::Param> CentralizedModel::parameters()
{
    auto out = bdp_.parameters("bdp");
    auto c = bdc_.parameters("bdc");
    out.insert(out.end(), c.begin(), c.end());
    return out;
}

std::vector<nn::Buffer> CentralizedModel::buffers()
{
    auto out = bdp_.buffers("bdp");
    auto c = bdc_.buffers("bdc");
    out.insert(out.end(), c.begin(), c.end());
    return out;
}

// ---------------------------------------------------------------------------
// Distributed

DistributedModel::DistributedModel(const ModelDims& dims, const ArchConfig& arch, DatasetStats stats)
    : dims_(dims), arch_(arch), stats_(std::move(stats))
{
    check_stats(dims_, stats_);
    const int local = dims.local_size();
    for (int rx = 0; rx <= dims.n_tps; ++rx)
        local_rows_.push_back(local_indices(dims.n_tps, dims.n_channels, rx));
    for (int i = 0; i < dims.n_tps; ++i) {
        bdf_.emplace_back(module_spec(local, dims.bf_bits, arch));
        bdp_.emplace_back(module_spec(local + dims.bb_bits, dims.n_power_levels, arch));
        bdc_.emplace_back(module_spec(local + dims.bb_bits, dims.n_channels, arch));
    }
    bdn_ = nn::BasicModule(module_spec(local + dims.n_tps * dims.bf_bits, dims.bb_bits, arch));
}

void DistributedModel::init(Rng& rng)
{
    for (auto& m : bdf_)
        m.init(rng);
    bdn_.init(rng);
    for (int i = 0; i < dims_.n_tps; ++i) {
        bdp_[i].init(rng);
        bdc_[i].init(rng);
    }
}

Matrix DistributedModel::gather_rows(const Matrix& x, int rx) const
{
    const auto& rows = local_rows_.at(rx);
    Matrix out(static_cast<Eigen::Index>(rows.size()), x.cols());
    for (std::size_t r = 0; r < rows.size(); ++r)
        out.row(static_cast<Eigen::Index>(r)) = x.row(static_cast<Eigen::Index>(rows[r]));
    return out;
}

BatchSoft DistributedModel::forward(const Matrix& x, Mode mode, Rng* rng)
{
    if (mode == Mode::Infer)
        return forward_infer(x);
    const int n = dims_.n_tps;
    std::vector<Matrix> feedback;
    for (int i = 0; i < n; ++i)
        feedback.push_back(nn::sigmoid(bdf_[i].forward(gather_rows(x, i + 1), mode, rng)));
    std::vector<Matrix> bs_in{gather_rows(x, 0)};
    bs_in.insert(bs_in.end(), feedback.begin(), feedback.end());
    const Matrix b0 = nn::sigmoid(bdn_.forward(stacked(bs_in), mode, rng));

    std::vector<Matrix> power, channel;
    for (int i = 0; i < n; ++i) {
        const Matrix in = stacked({gather_rows(x, i + 1), b0});
        power.push_back(nn::softmax_blocks(bdp_[i].forward(in, mode, rng), dims_.n_power_levels));
        channel.push_back(nn::softmax_blocks(bdc_[i].forward(in, mode, rng), dims_.n_channels));
    }
    last_.power = stacked(power);
    last_.channel = stacked(channel);
    last_.feedback = stacked(feedback);
    last_.bs = b0;
    return last_;
}

BatchSoft DistributedModel::forward_infer(const Matrix& x) const
{
    const int n = dims_.n_tps;
    std::vector<Matrix> feedback;
    for (int i = 0; i < n; ++i)
        feedback.push_back(encode_feedback(i, gather_rows(x, i + 1)));
    const Matrix fb = stacked(feedback);
    const Matrix b0 = notify(gather_rows(x, 0), fb);
    std::vector<Matrix> power, channel;
    for (int i = 0; i < n; ++i) {
        auto [p, c] = decide_tp(i, gather_rows(x, i + 1), b0);
        power.push_back(std::move(p));
        channel.push_back(std::move(c));
    }
    return {stacked(power), stacked(channel), fb, b0};
}

void DistributedModel::backward(const BatchSoft& grads)
{
    const int n = dims_.n_tps;
    const int local = dims_.local_size();
    const int np = dims_.n_power_levels;
    const int kk = dims_.n_channels;
    const int bf = dims_.bf_bits;
    const int bb = dims_.bb_bits;

    Matrix d_b0 = grads.bs.size() != 0 ? grads.bs : Matrix::Zero(bb, last_.bs.cols());
    for (int i = 0; i < n; ++i) {
        const Matrix dp = nn::softmax_blocks_backward(grads.power.middleRows(i * np, np),
                                                      last_.power.middleRows(i * np, np), np);
        d_b0 += bdp_[i].backward(dp).bottomRows(bb);
        const Matrix dc = nn::softmax_blocks_backward(grads.channel.middleRows(i * kk, kk),
                                                      last_.channel.middleRows(i * kk, kk), kk);
        d_b0 += bdc_[i].backward(dc).bottomRows(bb);
    }
    const Matrix d_bs_in = bdn_.backward(nn::sigmoid_backward(d_b0, last_.bs));
    for (int i = 0; i < n; ++i) {
        Matrix d_bi = d_bs_in.middleRows(local + i * bf, bf);
        if (grads.feedback.size() != 0)
            d_bi += grads.feedback.middleRows(i * bf, bf);
        bdf_[i].backward(nn::sigmoid_backward(d_bi, last_.feedback.middleRows(i * bf, bf)));
    }
}

Matrix DistributedModel::encode_feedback(int tp, const Matrix& local) const
{
    return nn::sigmoid(bdf_.at(tp).forward_infer(local));
}

Matrix DistributedModel::notify(const Matrix& bs_local, const Matrix& feedback) const
{
    if (feedback.rows() != dims_.n_tps * dims_.bf_bits)
        throw ShapeMismatch("BS expects N * B_F feedback values");
    return nn::sigmoid(bdn_.forward_infer(stacked({bs_local, feedback})));
}

std::pair<Matrix, Matrix> DistributedModel::decide_tp(int tp, const Matrix& local, const Matrix& notification) const
{
    if (notification.rows() != dims_.bb_bits)
        throw ShapeMismatch("TP expects B_B notification values");
    const Matrix in = stacked({local, notification});
    return {nn::softmax_blocks(bdp_.at(tp).forward_infer(in), dims_.n_power_levels),
            nn::softmax_blocks(bdc_.at(tp).forward_infer(in), dims_.n_channels)};
}

DistributedDecision DistributedModel::decide(const ChannelSample& sample) const
{
    const int n = dims_.n_tps;
    DistributedDecision out;

    // phase 1: every TP encodes its own CSI
    std::vector<Matrix> locals;
    std::vector<Matrix> feedback;
    for (int i = 0; i < n; ++i) {
        locals.push_back(normalized_local(sample, stats_, i + 1));
        feedback.push_back(binarize(encode_feedback(i, locals.back())));
    }
    // phase 2: BS merges its CSI with the received bits
    const Matrix b0 = binarize(notify(normalized_local(sample, stats_, 0), stacked(feedback)));
    // phase 3: every TP decides from its CSI and the broadcast
    out.allocation = Allocation::idle(n);
    for (int i = 0; i < n; ++i) {
        const auto [p, c] = decide_tp(i, locals[i], b0);
        out.allocation.power_idx[i] = argmax(p.col(0));
        out.allocation.channel_idx[i] = argmax(c.col(0));
    }
    out.allocation.canonicalize();
    for (const auto& f : feedback)
        out.feedback_bits.emplace_back(f.data(), f.data() + f.size());
    out.bs_bits.assign(b0.data(), b0.data() + b0.size());
    return out;
}

SoftOutputs DistributedModel::soft(const ChannelSample& sample) const
{
    return forward_infer(to_column(preprocess(sample, stats_))).column(0, dims_);
}

void DistributedModel::zero_grad()
{
    for (auto& m : bdf_)
        m.zero_grad();
    bdn_.zero_grad();
    for (auto& m : bdp_)
        m.zero_grad();
    for (auto& m : bdc_)
        m.zero_grad();
}

std::vector<nn::Param> DistributedModel::parameters()
{
    std::vector<nn::Param> out;
    auto add = [&out](std::vector<nn::Param> p) { out.insert(out.end(), p.begin(), p.end()); };
    for (int i = 0; i < dims_.n_tps; ++i)
        add(bdf_[i].parameters("bdf" + std::to_string(i)));
    add(bdn_.parameters("bdn"));
    for (int i = 0; i < dims_.n_tps; ++i) {
        add(bdp_[i].parameters("bdp" + std::to_string(i)));
        add(bdc_[i].parameters("bdc" + std::to_string(i)));
    }
    return out;
}

std::vector<nn::Buffer> DistributedModel::buffers()
{
    std::vector<nn::Buffer> out;
    auto add = [&out](std::vector<nn::Buffer> b) { out.insert(out.end(), b.begin(), b.end()); };
    for (int i = 0; i < dims_.n_tps; ++i)
        add(bdf_[i].buffers("bdf" + std::to_string(i)));
    add(bdn_.buffers("bdn"));
    for (int i = 0; i < dims_.n_tps; ++i) {
        add(bdp_[i].buffers("bdp" + std::to_string(i)));
        add(bdc_[i].buffers("bdc" + std::to_string(i)));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Bundles

namespace {

constexpr char kBundleMagic[8] = {'D', '2', 'D', 'M', 'B', '\x00', '\x01', '\x00'};

std::string format_double(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

template <typename Model>
std::map<std::string, std::string> base_manifest(const char* kind, const Model& model)
{
    const auto& d = model.dims();
    return {{"kind", kind},
            {"n_tps", std::to_string(d.n_tps)},
            {"n_channels", std::to_string(d.n_channels)},
            {"n_power_levels", std::to_string(d.n_power_levels)},
            {"bf_bits", std::to_string(d.bf_bits)},
            {"bb_bits", std::to_string(d.bb_bits)},
            {"units", std::to_string(model.arch().units)},
            {"width", std::to_string(model.arch().width)},
            {"dropout_rate", format_double(model.arch().dropout_rate)},
            {"stats_checksum", std::to_string(stats_checksum(model.stats()))}};
}

template <typename Model>
void write_bundle(const std::filesystem::path& path, Model& model, std::map<std::string, std::string> manifest,
                  const std::map<std::string, std::string>& extra)
{
    for (const auto& [k, v] : extra)
        manifest.emplace(k, v);
    std::string text;
    for (const auto& [k, v] : manifest)
        text += k + " = " + v + "\n";

    std::vector<nn::NamedTensor> tensors;
    for (const auto& p : model.parameters())
        tensors.push_back(nn::to_named(p.name, *p.value));
    for (const auto& b : model.buffers())
        tensors.push_back(nn::to_named(b.name, *b.value));
    const auto& st = model.stats();
    tensors.push_back(nn::to_named("stats.mean_log10", to_column(st.mean_log10)));
    tensors.push_back(nn::to_named("stats.std_log10", to_column(st.std_log10)));

    binary::atomic_write(path, [&](std::ostream& out) {
        binary::write_magic(out, kBundleMagic);
        binary::write_le<std::uint32_t>(out, static_cast<std::uint32_t>(text.size()));
        out.write(text.data(), static_cast<std::streamsize>(text.size()));
        nn::write_tensors(out, tensors);
    });
}

std::map<std::string, std::string> parse_manifest(std::istream& in)
{
    binary::expect_magic(in, kBundleMagic, "model bundle");
    const auto len = binary::read_le<std::uint32_t>(in);
    std::string text(len, '\0');
    if (!in.read(text.data(), len))
        throw FormatError("truncated bundle manifest");
    std::map<std::string, std::string> out;
    std::istringstream lines(text);
    std::string line;
    while (std::getline(lines, line)) {
        const auto eq = line.find(" = ");
        if (eq == std::string::npos)
            throw FormatError("malformed manifest line: " + line);
        out[line.substr(0, eq)] = line.substr(eq + 3);
    }
    return out;
}

struct LoadedBundle {
    std::map<std::string, std::string> manifest;
    std::map<std::string, nn::NamedTensor> tensors;
    ModelDims dims;
    ArchConfig arch;
    DatasetStats stats;
};

LoadedBundle load_bundle(const std::filesystem::path& path, const std::string& expected_kind)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw MissingDependency("cannot open model bundle " + path.string());
    LoadedBundle b;
    b.manifest = parse_manifest(in);
    if (b.manifest["kind"] != expected_kind)
        throw MissingDependency(path.string() + " holds a " + b.manifest["kind"] + " model, expected " +
                                expected_kind);
    for (auto& t : nn::read_tensors(in))
        b.tensors.emplace(t.name, std::move(t));
    try {
        b.dims = {std::stoi(b.manifest.at("n_tps")), std::stoi(b.manifest.at("n_channels")),
                  std::stoi(b.manifest.at("n_power_levels")), std::stoi(b.manifest.at("bf_bits")),
                  std::stoi(b.manifest.at("bb_bits"))};
        b.arch = {std::stoi(b.manifest.at("units")), std::stoi(b.manifest.at("width")),
                  std::stod(b.manifest.at("dropout_rate"))};
    } catch (const std::exception&) {
        throw FormatError("bundle manifest is missing model dimensions");
    }
    const std::size_t dim = static_cast<std::size_t>(b.dims.tensor_size());
    b.stats = {b.dims.n_tps, b.dims.n_channels, std::vector<double>(dim), std::vector<double>(dim)};
    auto fetch = [&](const std::string& name, std::vector<double>& dst) {
        const auto it = b.tensors.find(name);
        if (it == b.tensors.end() || it->second.data.size() != dim)
            throw FormatError("bundle lacks " + name);
        dst = it->second.data;
    };
    fetch("stats.mean_log10", b.stats.mean_log10);
    fetch("stats.std_log10", b.stats.std_log10);
    if (std::to_string(stats_checksum(b.stats)) != b.manifest["stats_checksum"])
        throw FormatError("bundle statistics do not match the manifest checksum");
    return b;
}

template <typename Model>
void restore(Model& model, const LoadedBundle& b)
{
    auto take = [&](const std::string& name, Matrix& dst) {
        const auto it = b.tensors.find(name);
        if (it == b.tensors.end())
            throw FormatError("bundle lacks tensor " + name);
        nn::assign_from(it->second, dst);
    };
    for (auto& p : model.parameters())
        take(p.name, *p.value);
    for (auto& buf : model.buffers())
        take(buf.name, *buf.value);
}

}  // namespace

std::uint64_t stats_checksum(const DatasetStats& stats)
{
    std::ostringstream out(std::ios::binary);
    write_stats(out, stats);
    const std::string bytes = out.str();
    return binary::fnv1a(std::span<const char>(bytes.data(), bytes.size()));
}

std::map<std::string, std::string> read_manifest(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw MissingDependency("cannot open model bundle " + path.string());
    return parse_manifest(in);
}

ModelKind bundle_kind(const std::filesystem::path& path)
{
    const auto m = read_manifest(path);
    const auto it = m.find("kind");
    if (it != m.end() && it->second == "centralized")
        return ModelKind::Centralized;
    if (it != m.end() && it->second == "distributed")
        return ModelKind::Distributed;
    throw FormatError("bundle has an unknown model kind");
}

void save_bundle(const std::filesystem::path& path, CentralizedModel& model,
                 const std::map<std::string, std::string>& extra)
{
    write_bundle(path, model, base_manifest("centralized", model), extra);
}

void save_bundle(const std::filesystem::path& path, DistributedModel& model,
                 const std::map<std::string, std::string>& extra)
{
    write_bundle(path, model, base_manifest("distributed", model), extra);
}

CentralizedModel load_centralized(const std::filesystem::path& path)
{
    auto b = load_bundle(path, "centralized");
    CentralizedModel model(b.dims, b.arch, b.stats);
    restore(model, b);
    return model;
}

DistributedModel load_distributed(const std::filesystem::path& path)
{
    auto b = load_bundle(path, "distributed");
    DistributedModel model(b.dims, b.arch, b.stats);
    restore(model, b);
    return model;
}

}  // namespace d2dra
