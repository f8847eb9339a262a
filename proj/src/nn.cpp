#include "mrt/nn.hpp"

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

namespace mrt {

long long param_count(const LayerSpec& spec) {
    return static_cast<long long>(spec.in_dim) * spec.out_dim + spec.out_dim;
}

long long param_count(const std::vector<LayerSpec>& arch) {
    long long total = 0;
    for (const LayerSpec& layer : arch) {
        total += param_count(layer);
    }
    return total;
}

std::vector<LayerSpec> make_architecture(const std::vector<int>& dims, double dropout) {
    if (dims.size() < 2) {
        throw std::runtime_error("make_architecture: need at least input and output dims");
    }
    const auto n_hidden = static_cast<int>(dims.size()) - 2;
    // Dropout regularizes the wide early layers; the last two hidden layers
    // are narrow enough that dropping a quarter of them hurts.
    const int n_dropout = std::max(0, n_hidden - 2);

    std::vector<LayerSpec> arch;
    for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
        if (dims[l] <= 0 || dims[l + 1] <= 0) {
            throw std::runtime_error("make_architecture: dims must be positive");
        }
        LayerSpec spec;
        spec.in_dim = dims[l];
        spec.out_dim = dims[l + 1];
        const bool last = l + 2 == dims.size();
        spec.activation = last ? Activation::softmax : Activation::relu;
        spec.dropout_after = (!last && static_cast<int>(l) < n_dropout) ? dropout : 0.0;
        arch.push_back(spec);
    }
    return arch;
}

std::vector<LayerSpec> default_architecture(double dropout) {
    return make_architecture({12000, 15000, 9000, 4500, 1500, 450, 100, 6}, dropout);
}

void validate_architecture(const std::vector<LayerSpec>& arch) {
    if (arch.empty()) {
        throw std::runtime_error("architecture: no layers");
    }
    for (std::size_t l = 0; l < arch.size(); ++l) {
        if (arch[l].in_dim <= 0 || arch[l].out_dim <= 0) {
            throw std::runtime_error("architecture: non-positive layer dims");
        }
        if (l > 0 && arch[l].in_dim != arch[l - 1].out_dim) {
            throw std::runtime_error("architecture: layer " + std::to_string(l) +
                                     " input dim " + std::to_string(arch[l].in_dim) +
                                     " does not chain from previous output " +
                                     std::to_string(arch[l - 1].out_dim));
        }
        const bool last = l + 1 == arch.size();
        if (!last && arch[l].activation == Activation::softmax) {
            throw std::runtime_error("architecture: softmax before the final layer");
        }
        if (last && arch[l].activation != Activation::softmax) {
            throw std::runtime_error("architecture: final layer must be softmax");
        }
        if (last && arch[l].dropout_after != 0.0) {
            throw std::runtime_error("architecture: dropout after the final layer");
        }
        if (arch[l].dropout_after < 0.0 || arch[l].dropout_after >= 1.0) {
            throw std::runtime_error("architecture: dropout rate outside [0, 1)");
        }
    }
}

namespace {

constexpr char kModelMagic[4] = {'M', 'R', 'N', 'N'};
constexpr std::uint32_t kModelVersion = 1;

template <typename T>
void write_raw(std::ofstream& out, const T& value) {
    out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T read_raw(std::ifstream& in, const std::string& path) {
    T value{};
    if (!in.read(reinterpret_cast<char*>(&value), sizeof(T))) {
        throw std::runtime_error("truncated model file: " + path);
    }
    return value;
}

}  // namespace

void save_model(const std::string& path, const Network& net) {
    validate_architecture(net.arch);
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot write model file: " + path);
    }
    out.write(kModelMagic, 4);
    write_raw(out, kModelVersion);
    write_raw(out, static_cast<std::uint32_t>(net.arch.size()));
    for (const LayerSpec& spec : net.arch) {
        write_raw(out, static_cast<std::uint32_t>(spec.in_dim));
        write_raw(out, static_cast<std::uint32_t>(spec.out_dim));
        write_raw(out, static_cast<std::uint8_t>(spec.activation));
        write_raw(out, static_cast<float>(spec.dropout_after));
    }
    for (std::size_t l = 0; l < net.arch.size(); ++l) {
        const auto& w = net.weights[l];
        for (Eigen::Index r = 0; r < w.rows(); ++r) {
            for (Eigen::Index c = 0; c < w.cols(); ++c) {
                write_raw(out, w(r, c));
            }
        }
        for (Eigen::Index r = 0; r < net.biases[l].size(); ++r) {
            write_raw(out, net.biases[l](r));
        }
    }
    if (!out) {
        throw std::runtime_error("failed writing model file: " + path);
    }
}

Network load_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot open model file: " + path);
    }
    char magic[4];
    if (!in.read(magic, 4) || std::memcmp(magic, kModelMagic, 4) != 0) {
        throw std::runtime_error("not a model file: " + path);
    }
    const auto version = read_raw<std::uint32_t>(in, path);
    if (version != kModelVersion) {
        throw std::runtime_error("unsupported model version " + std::to_string(version) +
                                 ": " + path);
    }
    const auto n_layers = read_raw<std::uint32_t>(in, path);

    Network net;
    for (std::uint32_t l = 0; l < n_layers; ++l) {
        LayerSpec spec;
        spec.in_dim = static_cast<int>(read_raw<std::uint32_t>(in, path));
        spec.out_dim = static_cast<int>(read_raw<std::uint32_t>(in, path));
        const auto activation = read_raw<std::uint8_t>(in, path);
        if (activation > 1) {
            throw std::runtime_error("invalid activation code in model file: " + path);
        }
        spec.activation = static_cast<Activation>(activation);
        spec.dropout_after = read_raw<float>(in, path);
        net.arch.push_back(spec);
    }
    validate_architecture(net.arch);
    for (const LayerSpec& spec : net.arch) {
        MatrixX<float> w(spec.out_dim, spec.in_dim);
        for (int r = 0; r < spec.out_dim; ++r) {
            for (int c = 0; c < spec.in_dim; ++c) {
                w(r, c) = read_raw<float>(in, path);
            }
        }
        VectorX<float> b(spec.out_dim);
        for (int r = 0; r < spec.out_dim; ++r) {
            b(r) = read_raw<float>(in, path);
        }
        net.weights.push_back(std::move(w));
        net.biases.push_back(std::move(b));
    }
    return net;
}

std::string TrainHistory::to_csv() const {
    std::ostringstream out;
    out << "epoch,train_loss,train_acc,val_loss,val_acc\n";
    char line[160];
    for (std::size_t e = 0; e < train_loss.size(); ++e) {
        std::snprintf(line, sizeof(line), "%zu,%.9g,%.9g,%.9g,%.9g\n", e + 1,
                      train_loss[e], train_acc[e], val_loss[e], val_acc[e]);
        out << line;
    }
    return out.str();
}

void save_history(const std::string& path, const TrainHistory& history) {
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("cannot write history file: " + path);
    }
    out << history.to_csv();
    if (!out) {
        throw std::runtime_error("failed writing history file: " + path);
    }
}

}  // namespace mrt
