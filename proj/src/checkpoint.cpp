#include "fepinn/checkpoint.hpp"

#include <fstream>
#include <sstream>

namespace fepinn {

namespace {

constexpr const char* kMagic = "FEPINN-CKPT";
constexpr int kVersion = 1;

} // namespace

void save_checkpoint(std::ostream& os, const Checkpoint& ckpt) {
    ckpt.arch.validate();
    if (ckpt.params.values.size() != ParamLayout(ckpt.arch).total)
        throw std::invalid_argument("checkpoint parameters do not match the architecture");
    if (ckpt.params.tags.size() != static_cast<size_t>(ckpt.arch.n_layers()))
        throw std::invalid_argument("checkpoint needs exactly one tag per layer");

    os << kMagic << ' ' << kVersion << '\n';
    os << "inputs " << ckpt.arch.n_inputs << '\n';
    os << "outputs " << ckpt.arch.n_outputs << '\n';
    os << "hidden";
    for (int w : ckpt.arch.hidden) os << ' ' << w;
    os << '\n';
    os << "activation tanh\n";
    os << "tags";
    for (Provenance t : ckpt.params.tags) os << ' ' << provenance_name(t);
    os << '\n';
    os << "values " << ckpt.params.values.size() << '\n';
    os << "binary\n";
    os.write(reinterpret_cast<const char*>(ckpt.params.values.data()),
             static_cast<std::streamsize>(ckpt.params.values.size() * sizeof(double)));
    if (!os) throw std::runtime_error("failed to write checkpoint payload");
}

void save_checkpoint(const std::string& path, const Checkpoint& ckpt) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open checkpoint for writing: " + path);
    save_checkpoint(os, ckpt);
}

Checkpoint load_checkpoint(std::istream& is) {
    std::string line;
    auto next_line = [&](const std::string& what) {
        if (!std::getline(is, line))
            throw std::runtime_error("corrupt checkpoint: missing " + what);
        return std::istringstream(line);
    };

    {
        auto ls = next_line("header");
        std::string magic;
        int version = -1;
        ls >> magic >> version;
        if (magic != kMagic) throw std::runtime_error("not a checkpoint file");
        if (version != kVersion)
            throw std::runtime_error("unsupported checkpoint version " + std::to_string(version));
    }

    Checkpoint ckpt;
    size_t declared_values = 0;
    auto expect_key = [&](std::istringstream& ls, const std::string& key) {
        std::string k;
        ls >> k;
        if (k != key) throw std::runtime_error("corrupt checkpoint: expected '" + key + "' line");
    };

    {
        auto ls = next_line("inputs");
        expect_key(ls, "inputs");
        if (!(ls >> ckpt.arch.n_inputs)) throw std::runtime_error("corrupt checkpoint: inputs");
    }
    {
        auto ls = next_line("outputs");
        expect_key(ls, "outputs");
        if (!(ls >> ckpt.arch.n_outputs)) throw std::runtime_error("corrupt checkpoint: outputs");
    }
    {
        auto ls = next_line("hidden");
        expect_key(ls, "hidden");
        int w;
        while (ls >> w) ckpt.arch.hidden.push_back(w);
    }
    {
        auto ls = next_line("activation");
        expect_key(ls, "activation");
        std::string a;
        ls >> a;
        if (a != "tanh") throw std::runtime_error("unsupported activation: " + a);
        ckpt.arch.activation = Activation::tanh;
    }
    {
        auto ls = next_line("tags");
        expect_key(ls, "tags");
        std::string t;
        while (ls >> t) ckpt.params.tags.push_back(provenance_from_name(t));
    }
    {
        auto ls = next_line("values");
        expect_key(ls, "values");
        if (!(ls >> declared_values)) throw std::runtime_error("corrupt checkpoint: values");
    }
    {
        auto ls = next_line("binary marker");
        std::string b;
        ls >> b;
        if (b != "binary") throw std::runtime_error("corrupt checkpoint: missing binary marker");
    }

    ckpt.arch.validate();
    if (declared_values != ParamLayout(ckpt.arch).total)
        throw std::runtime_error("checkpoint value count does not match its architecture");
    if (ckpt.params.tags.size() != static_cast<size_t>(ckpt.arch.n_layers()))
        throw std::runtime_error("checkpoint tag count does not match its architecture");

    ckpt.params.values.resize(declared_values);
    is.read(reinterpret_cast<char*>(ckpt.params.values.data()),
            static_cast<std::streamsize>(declared_values * sizeof(double)));
    if (static_cast<size_t>(is.gcount()) != declared_values * sizeof(double))
        throw std::runtime_error("corrupt checkpoint: truncated payload");
    char extra;
    if (is.read(&extra, 1))
        throw std::runtime_error("corrupt checkpoint: trailing bytes after payload");
    return ckpt;
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open checkpoint: " + path);
    return load_checkpoint(is);
}

} // namespace fepinn
