#include "cli.hpp"

#include <algorithm>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "iscs/ablation.hpp"
#include "iscs/error.hpp"
#include "iscs/importance.hpp"
#include "iscs/manifest.hpp"
#include "iscs/metrics.hpp"
#include "iscs/scheduler.hpp"
#include "iscs/synthetic.hpp"
#include "iscs/toy_codec.hpp"

namespace iscs::cli {
namespace {

namespace fs = std::filesystem;
using json = nlohmann::json;

// One subcommand: its options, the values they bind to, and what it does.
struct Command {
    CLI::App* app = nullptr;
    std::map<std::string, std::function<std::string()>> fields;
    std::function<void(const Command&, std::ostream&)> action;

    std::map<std::string, std::string> effective() const {
        std::map<std::string, std::string> m;
        for (const auto& [k, f] : fields) {
            auto v = f();
            if (!v.empty()) m[k] = std::move(v);
        }
        return m;
    }
};

std::string to_text(const std::string& v) { return v; }
std::string to_text(double v) { return format_number(v); }
std::string to_text(std::size_t v) { return std::to_string(v); }

template <typename T>
CLI::Option* field(Command& cmd, const std::string& name, T& var, const std::string& desc) {
    cmd.fields[name] = [&var] { return to_text(var); };
    return cmd.app->add_option("--" + name, var, desc)->capture_default_str();
}

// ---------------------------------------------------------------------------
// File helpers

std::vector<std::uint8_t> read_bytes(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open '" + path.string() + "'");
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_bytes(const fs::path& path, std::span<const std::uint8_t> bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw InputError("cannot write '" + path.string() + "'");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw InputError("write failed for '" + path.string() + "'");
}

void write_text(const fs::path& path, const std::string& text) {
    write_bytes(path, {reinterpret_cast<const std::uint8_t*>(text.data()), text.size()});
}

std::string config_json(const Command& cmd) {
    json j = json::object();
    for (const auto& [k, v] : cmd.effective()) j[k] = v;
    return j.dump(2) + "\n";
}

/// Effective config next to an artifact, as `<artifact>.config.json`. Feeding it back through
/// --config reproduces the artifact.
void write_sidecar(const fs::path& artifact, const Command& cmd) {
    write_text(artifact.string() + ".config.json", config_json(cmd));
}

std::vector<Image> read_image_dir(const fs::path& dir) {
    std::error_code ec;
    if (!fs::is_directory(dir, ec)) throw InputError("'" + dir.string() + "' is not a directory");
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(dir)) {
        const auto ext = e.path().extension().string();
        if (e.is_regular_file() && (ext == ".pgm" || ext == ".ppm")) files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());
    if (files.empty()) throw InputError("no .pgm/.ppm images in '" + dir.string() + "'");
    std::vector<Image> images;
    for (const auto& f : files) images.push_back(read_image(f));
    return images;
}

std::string resolve_tensor(const TensorFile& tf, const std::string& pattern) {
    if (tf.contains(pattern)) return pattern;
    std::vector<std::string> hits;
    for (const auto& [name, info] : tf.entries)
        if (glob_match(pattern, name)) hits.push_back(name);
    if (hits.empty())
        throw TensorFileError(TensorErrorKind::MissingTensor, pattern, "no tensor matches '" + pattern + "'");
    if (hits.size() > 1) throw InputError("pattern '" + pattern + "' matches " + std::to_string(hits.size()) + " tensors");
    return hits.front();
}

struct LoadedKernels {
    ManifestSource source;
    ConvKernelSet kernels;
};

LoadedKernels load_kernels(const std::string& file, const std::string& tensor, const std::string& bias) {
    const auto tf = read_tensor_file(file);
    if (tf.entries.empty()) throw InputError("'" + file + "' contains no tensors");
    LoadedKernels out;
    out.source.file = file;
    out.source.weight_tensor = resolve_tensor(tf, tensor);
    if (!bias.empty()) out.source.bias_tensor = resolve_tensor(tf, bias);
    out.source.shape = tf.info(out.source.weight_tensor).shape;
    out.kernels = extract_kernel_set(tf, out.source.weight_tensor, out.source.bias_tensor);
    return out;
}

bool parse_on_off(const std::string& v, const char* what) {
    if (v == "on") return true;
    if (v == "off") return false;
    throw InputError(std::string(what) + " must be 'on' or 'off'");
}

std::string join(std::span<const std::size_t> v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? " " : "") + std::to_string(v[i]);
    return s;
}

// ---------------------------------------------------------------------------
// Subcommands

struct AnalyzeArgs {
    std::string weights, tensor, bias, out, sim_out;
};

void add_analyze(CLI::App& app, std::vector<std::unique_ptr<Command>>& cmds) {
    auto a = std::make_shared<AnalyzeArgs>();
    auto& cmd = *cmds.emplace_back(std::make_unique<Command>());
    cmd.app = app.add_subcommand("analyze", "Per-channel variance, bias and similarity scores of one layer");
    field(cmd, "weights", a->weights, "Tensor container file")->required();
    field(cmd, "tensor", a->tensor, "Weight tensor name or glob")->required();
    field(cmd, "bias", a->bias, "Bias tensor name or glob");
    field(cmd, "out", a->out, "Scores CSV (channel,variance,bias)")->required();
    field(cmd, "sim-out", a->sim_out, "Similarity matrix CSV");
    cmd.action = [a](const Command& self, std::ostream& out) {
        const auto k = load_kernels(a->weights, a->tensor, a->bias);
        const auto s = compute_scores(k.kernels);
        std::string csv = "channel,variance,bias\n";
        for (std::size_t c = 0; c < s.channels(); ++c)
            csv += std::to_string(c) + "," + format_number(s.variance[c]) + "," + format_number(s.bias_mag[c]) + "\n";
        write_text(a->out, csv);
        write_sidecar(a->out, self);
        if (!a->sim_out.empty()) {
            std::string sim;
            for (std::size_t r = 0; r < s.channels(); ++r) {
                for (std::size_t c = 0; c < s.channels(); ++c) sim += (c ? "," : "") + format_number(s.similarity(r, c));
                sim += "\n";
            }
            write_text(a->sim_out, sim);
        }
        out << "analyzed " << k.source.weight_tensor << ": " << s.channels() << " channels\n";
    };
}

struct DiscoverArgs {
    std::string weights, tensor, bias, out;
    std::size_t group_size = 64, slice_count = 8, num_groups = 0;
    double bias_z = 3.5;
    std::string similarity = "raw", strategy = "kn_i";
};

void add_discover(CLI::App& app, std::vector<std::unique_ptr<Command>>& cmds) {
    auto a = std::make_shared<DiscoverArgs>();
    auto& cmd = *cmds.emplace_back(std::make_unique<Command>());
    cmd.app = app.add_subcommand("discover", "Discover SC/SA groups and bias channels; write a manifest");
    field(cmd, "weights", a->weights, "Tensor container file")->required();
    field(cmd, "tensor", a->tensor, "Weight tensor name or glob")->required();
    field(cmd, "bias", a->bias, "Bias tensor name or glob");
    field(cmd, "group-size", a->group_size, "Channels per group N, SC included");
    field(cmd, "slice-count", a->slice_count, "Slices per group S (must divide N)");
    field(cmd, "num-groups", a->num_groups, "Number of groups M (0 = floor((C - bias) / N))");
    field(cmd, "bias-z", a->bias_z, "Robust z-score threshold for bias-dominated channels");
    field(cmd, "similarity", a->similarity, "raw or abs");
    field(cmd, "strategy", a->strategy, "kn_i, corr_ascending, corr_descending or tsp_greedy");
    field(cmd, "out", a->out, "Manifest JSON")->required();
    cmd.action = [a](const Command& self, std::ostream& out) {
        const auto k = load_kernels(a->weights, a->tensor, a->bias);
        DiscoveryParams p;
        p.group_size = a->group_size;
        if (a->num_groups > 0) p.num_groups = a->num_groups;
        p.bias_z_threshold = a->bias_z;
        p.similarity_mode = similarity_mode_from_string(a->similarity);
        const auto strategy = ordering_strategy_from_string(a->strategy);
        if (a->slice_count == 0 || a->group_size % a->slice_count != 0)
            throw InputError("slice count " + std::to_string(a->slice_count) + " does not divide group size " +
                             std::to_string(a->group_size));
        auto m = build_manifest(k.source, k.kernels, p, a->slice_count, strategy);
        m.config = self.effective();
        write_manifest(a->out, m);
        out << "groups: " << m.structure.groups.size() << "\n";
        out << "bias channels: " << join(m.structure.bias_channels) << "\n";
        out << "residual: " << m.structure.residual.size() << "\n";
    };
}

struct FitArgs {
    std::string images, out;
    std::size_t patch_size = 8, channels = 32, seed = 1;
    double delta = 0.05, beta = 4.0;
};

void add_fit(CLI::App& app, std::vector<std::unique_ptr<Command>>& cmds) {
    auto a = std::make_shared<FitArgs>();
    auto& cmd = *cmds.emplace_back(std::make_unique<Command>());
    cmd.app = app.add_subcommand("fit", "Fit the patch-PCA toy codec to a directory of grayscale images");
    field(cmd, "images", a->images, "Directory of .pgm images")->required();
    field(cmd, "out", a->out, "Model file (tensor container)")->required();
    field(cmd, "patch-size", a->patch_size, "Patch side p");
    field(cmd, "channels", a->channels, "Latent channels C (<= p*p)");
    field(cmd, "delta", a->delta, "Quantizer step");
    field(cmd, "beta", a->beta, "Planted bias value of channel 0");
    field(cmd, "seed", a->seed, "Seed for the bias channel's weight signs");
    cmd.action = [a](const Command& self, std::ostream& out) {
        const auto images = read_image_dir(a->images);
        FitOptions o;
        o.patch_size = a->patch_size;
        o.channels = a->channels;
        o.step = a->delta;
        o.beta = a->beta;
        o.seed = a->seed;
        const auto model = fit(images, o);
        save_model(a->out, model);
        write_sidecar(a->out, self);
        out << "fitted " << model.channels << " channels on " << images.size() << " images; top eigenvalue "
            << format_number(model.eigenvalues[1]) << "\n";
    };
}

struct EncodeArgs {
    std::string model, input, out, manifest, scalar_path = "off";
    double delta = 0.0;
};

// Scalar-path channels: the manifest's bias channels, or those discovered from the model's weights.
std::vector<std::size_t> scalar_channels_for(const ToyCodecModel& model, const IscsManifest* manifest) {
    if (manifest) return manifest->structure.bias_channels;
    return flag_bias_dominated(compute_scores(export_encoder_weights(model)), DiscoveryParams{}.bias_z_threshold);
}

IscsManifest load_manifest_for(const std::string& path, std::size_t channels) {
    auto m = read_manifest(path);
    if (m.channels() != channels)
        throw InputError("manifest describes " + std::to_string(m.channels()) + " channels but the model has " +
                         std::to_string(channels));
    return m;
}

void add_encode(CLI::App& app, std::vector<std::unique_ptr<Command>>& cmds) {
    auto a = std::make_shared<EncodeArgs>();
    auto& cmd = *cmds.emplace_back(std::make_unique<Command>());
    cmd.app = app.add_subcommand("encode", "Encode a grayscale image with the toy codec");
    field(cmd, "model", a->model, "Model file")->required();
    field(cmd, "input", a->input, "Input .pgm")->required();
    field(cmd, "out", a->out, "Output bitstream")->required();
    field(cmd, "manifest", a->manifest, "Manifest whose permutation sets the coding order");
    field(cmd, "scalar-path", a->scalar_path, "on: send bias channels as one scalar each");
    field(cmd, "delta", a->delta, "Quantizer step override (0 keeps the model's)");
    cmd.action = [a](const Command& self, std::ostream& out) {
        auto model = load_model(a->model);
        if (a->delta < 0.0) throw InputError("--delta must be positive");
        if (a->delta > 0.0) model.step = static_cast<float>(a->delta);
        const Image img = read_image(a->input);
        EncodeOptions o;
        std::optional<IscsManifest> manifest;
        if (!a->manifest.empty()) {
            manifest = load_manifest_for(a->manifest, model.channels);
            o.permutation = manifest->plan.permutation;
            o.manifest_hash = manifest_hash(*manifest);
        }
        if (parse_on_off(a->scalar_path, "--scalar-path")) {
            o.scalar_channels = scalar_channels_for(model, manifest ? &*manifest : nullptr);
            o.scalar_path = !o.scalar_channels.empty();
        }
        const auto stream = encode_image(model, img, o);
        write_bytes(a->out, stream);
        write_sidecar(a->out, self);
        out << "wrote " << stream.size() << " bytes, "
            << format_number(8.0 * static_cast<double>(stream.size()) / static_cast<double>(img.pixel_count()))
            << " bpp\n";
    };
}

struct DecodeArgs {
    std::string model, input, out, manifest, reference;
};

void add_decode(CLI::App& app, std::vector<std::unique_ptr<Command>>& cmds) {
    auto a = std::make_shared<DecodeArgs>();
    auto& cmd = *cmds.emplace_back(std::make_unique<Command>());
    cmd.app = app.add_subcommand("decode", "Decode a toy-codec bitstream to .pgm");
    field(cmd, "model", a->model, "Model file")->required();
    field(cmd, "input", a->input, "Bitstream")->required();
    field(cmd, "out", a->out, "Output .pgm")->required();
    field(cmd, "manifest", a->manifest, "Manifest used at encode time (required for permuted streams)");
    field(cmd, "reference", a->reference, "Original image; prints PSNR against it");
    cmd.action = [a](const Command& self, std::ostream& out) {
        auto model = load_model(a->model);
        const auto stream = read_bytes(a->input);
        const auto header = parse_bitstream_header(stream);
        // The stream records its quantizer step; the model hash check covers it.
        model.step = header.step;
        DecodeOptions o;
        if (!a->manifest.empty()) {
            const auto m = load_manifest_for(a->manifest, model.channels);
            o.permutation = m.plan.permutation;
            o.manifest_hash = manifest_hash(m);
        }
        const Image img = decode_image(stream, model, o);
        write_image(a->out, img);
        write_sidecar(a->out, self);
        out << "decoded " << img.width << "x" << img.height << "\n";
        if (!a->reference.empty()) out << "psnr " << format_number(psnr(read_image(a->reference), img)) << "\n";
    };
}

struct AblateArgs {
    std::string model, images, manifest, out, plot_data;
    double bias_z = 3.5;
};

void add_ablate(CLI::App& app, std::vector<std::unique_ptr<Command>>& cmds) {
    auto a = std::make_shared<AblateArgs>();
    auto& cmd = *cmds.emplace_back(std::make_unique<Command>());
    cmd.app = app.add_subcommand("ablate", "Single-channel removal sweep and bpp/quality correlation");
    field(cmd, "model", a->model, "Model file")->required();
    field(cmd, "images", a->images, "Directory of .pgm images")->required();
    field(cmd, "manifest", a->manifest, "Manifest whose bias channels are the outliers");
    field(cmd, "bias-z", a->bias_z, "Outlier threshold when no manifest is given");
    field(cmd, "out", a->out, "Ablation CSV")->required();
    field(cmd, "plot-data", a->plot_data, "Plot TSV (bpp, delta_psnr per series)");
    cmd.action = [a](const Command& self, std::ostream& out) {
        const auto model = load_model(a->model);
        const auto images = read_image_dir(a->images);
        std::vector<std::size_t> outliers;
        if (!a->manifest.empty())
            outliers = load_manifest_for(a->manifest, model.channels).structure.bias_channels;
        else
            outliers = flag_bias_dominated(compute_scores(export_encoder_weights(model)), a->bias_z);
        const auto sweep = ablation_sweep(model, images, outliers);
        const auto report = correlation_report(sweep.rows);
        write_text(a->out, ablation_csv(sweep.rows));
        write_sidecar(a->out, self);
        if (!a->plot_data.empty()) write_text(a->plot_data, ablation_plot_tsv(sweep.rows));
        out << "spearman " << format_number(report.spearman) << "\n";
        out << "log_fit_r2 " << format_number(report.log_fit_r2) << "\n";
        out << "outliers " << join(report.outliers) << "\n";
        out << "msssim_scales " << sweep.msssim_scales << "\n";
    };
}

struct ScheduleArgs {
    std::string manifest, cost = "1,0.05,2", out, trace, weights, tensor, bias;
    std::size_t flat_slices = 0, workers = 4;
};

void add_schedule(CLI::App& app, std::vector<std::unique_ptr<Command>>& cmds) {
    auto a = std::make_shared<ScheduleArgs>();
    auto& cmd = *cmds.emplace_back(std::make_unique<Command>());
    cmd.app = app.add_subcommand("schedule", "Simulate context-model latency for flat and grouped slice orders");
    field(cmd, "manifest", a->manifest, "Manifest")->required();
    field(cmd, "flat-slices", a->flat_slices, "Slices of the flat baseline (0 = same task count as grouped)");
    field(cmd, "workers", a->workers, "Parallel workers P");
    field(cmd, "cost", a->cost, "base,per_channel,sync");
    field(cmd, "out", a->out, "Comparison CSV")->required();
    field(cmd, "trace", a->trace, "Trace CSV of the manifest's plan");
    field(cmd, "weights", a->weights, "Weights, to add rows for every ordering strategy");
    field(cmd, "tensor", a->tensor, "Weight tensor name or glob (with --weights)");
    field(cmd, "bias", a->bias, "Bias tensor name or glob (with --weights)");
    cmd.action = [a](const Command& self, std::ostream& out) {
        const CostModel cost = parse_cost_model(a->cost);
        if (a->workers < 1) throw InputError("--workers must be >= 1");
        const auto m = read_manifest(a->manifest);
        const std::size_t c = m.channels();
        const std::size_t t = a->flat_slices > 0 ? a->flat_slices : grouped_task_count(m.plan);

        std::vector<NamedDag> dags;
        dags.push_back({"flat", build_flat_dag(t, c, cost)});
        dags.push_back({std::string("iscs_") + to_string(m.strategy), build_grouped_dag(m.plan, cost)});
        dags.push_back({"naive_index", build_grouped_dag(build_index_plan(c, m.params.group_size, m.slice_count), cost)});
        if (!a->weights.empty()) {
            if (a->tensor.empty()) throw InputError("--weights needs --tensor");
            const auto k = load_kernels(a->weights, a->tensor, a->bias);
            if (k.kernels.out_channels != c) throw InputError("weights do not match the manifest's channel count");
            const auto sim = cosine_similarity_matrix(k.kernels);
            for (auto s : {OrderingStrategy::KnI, OrderingStrategy::CorrAscending, OrderingStrategy::CorrDescending,
                           OrderingStrategy::TspGreedy}) {
                if (s == m.strategy) continue;
                const auto plan = build_plan(m.structure, sim, m.slice_count, s, m.params.similarity_mode);
                dags.push_back({std::string("iscs_") + to_string(s), build_grouped_dag(plan, cost)});
            }
        }
        const auto rows = compare_strategies(dags, cost, a->workers);
        write_text(a->out, strategies_csv(rows));
        write_sidecar(a->out, self);
        if (!a->trace.empty()) {
            const auto report = simulate(dags[1].dag, cost, a->workers);
            write_text(a->trace, trace_csv(dags[1].dag, report));
        }
        for (const auto& r : rows)
            out << r.name << ": makespan " << format_number(r.makespan) << ", speedup " << format_number(r.speedup)
                << "\n";
    };
}

struct SynthImagesArgs {
    std::string out, kind = "pink";
    std::size_t count = 8, size = 256, patch_size = 8, seed = 1;
};

void add_synth_images(CLI::App& app, std::vector<std::unique_ptr<Command>>& cmds) {
    auto a = std::make_shared<SynthImagesArgs>();
    auto& cmd = *cmds.emplace_back(std::make_unique<Command>());
    cmd.app = app.add_subcommand("synth-images", "Write seeded synthetic grayscale test images");
    field(cmd, "out", a->out, "Output directory")->required();
    field(cmd, "kind", a->kind, "pink (1/f spectrum) or low-rank (level + checkerboard patches)");
    field(cmd, "count", a->count, "Number of images");
    field(cmd, "size", a->size, "Image side in pixels");
    field(cmd, "patch-size", a->patch_size, "Patch side for low-rank images");
    field(cmd, "seed", a->seed, "Random seed");
    cmd.action = [a](const Command& self, std::ostream& out) {
        if (a->kind != "pink" && a->kind != "low-rank") throw InputError("--kind must be pink or low-rank");
        if (a->size < 1) throw InputError("--size must be >= 1");
        fs::create_directories(a->out);
        Rng rng(a->seed);
        for (std::size_t i = 0; i < a->count; ++i) {
            const Image img = a->kind == "pink" ? generate_pink_noise_image(a->size, a->size, rng)
                                                : generate_low_rank_image(a->size, a->size, a->patch_size, rng);
            char name[32];
            std::snprintf(name, sizeof(name), "img_%03zu.pgm", i);
            write_image(fs::path(a->out) / name, img);
        }
        write_text(fs::path(a->out) / "config.json", config_json(self));
        out << "wrote " << a->count << " images to " << a->out << "\n";
    };
}

struct SynthWeightsArgs {
    std::string out, truth, random = "off";
    std::size_t groups = 2, group_size = 4, bias_count = 1, residual = 0, in_channels = 2, kernel_size = 3, seed = 1;
};

json structure_json(const IscsStructure& s) {
    json groups = json::array();
    for (const auto& g : s.groups) groups.push_back({{"sc", g.sc}, {"sa", g.sa}});
    return {{"groups", groups}, {"bias_channels", s.bias_channels}, {"residual", s.residual}};
}

void add_synth_weights(CLI::App& app, std::vector<std::unique_ptr<Command>>& cmds) {
    auto a = std::make_shared<SynthWeightsArgs>();
    auto& cmd = *cmds.emplace_back(std::make_unique<Command>());
    cmd.app = app.add_subcommand("synth-weights", "Write a kernel set with planted SC/SA/bias structure");
    field(cmd, "out", a->out, "Tensor container (tensors encoder.weight, encoder.bias)")->required();
    field(cmd, "truth", a->truth, "JSON file receiving the planted structure");
    field(cmd, "random", a->random, "on: draw the structure sizes from the seed");
    field(cmd, "groups", a->groups, "Planted groups M");
    field(cmd, "group-size", a->group_size, "Channels per group N");
    field(cmd, "bias-count", a->bias_count, "Bias-dominated channels B");
    field(cmd, "residual", a->residual, "Leftover noise channels (< N)");
    field(cmd, "in-channels", a->in_channels, "Kernel input channels");
    field(cmd, "kernel-size", a->kernel_size, "Kernel side K");
    field(cmd, "seed", a->seed, "Random seed");
    cmd.action = [a](const Command& self, std::ostream& out) {
        Rng rng(a->seed);
        PlantedConfig c;
        if (parse_on_off(a->random, "--random")) {
            c = random_planted_config(rng);
        } else {
            c.num_groups = a->groups;
            c.group_size = a->group_size;
            c.bias_count = a->bias_count;
            c.residual = a->residual;
            c.in_channels = a->in_channels;
            c.kernel_size = a->kernel_size;
        }
        const auto planted = generate_planted(c, rng);
        const auto& k = planted.kernels;
        TensorFile tf;
        const auto co = static_cast<std::int64_t>(k.out_channels);
        const auto ci = static_cast<std::int64_t>(k.in_channels);
        const auto ks = static_cast<std::int64_t>(k.kernel_size);
        tf.add("encoder.weight", DType::F64, {co, ci, ks, ks}, k.weights);
        tf.add("encoder.bias", DType::F64, {co}, *k.bias);
        write_tensor_file(a->out, tf);
        write_sidecar(a->out, self);
        if (!a->truth.empty()) {
            json j = structure_json(planted.truth);
            j["group_size"] = c.group_size;
            write_text(a->truth, j.dump(2) + "\n");
        }
        out << "planted " << c.num_groups << " groups of " << c.group_size << ", " << c.bias_count
            << " bias channels, " << c.residual << " residual in " << c.channels() << " channels\n";
    };
}

// ---------------------------------------------------------------------------
// Config files: every key becomes "--key value" ahead of the real arguments, so anything
// given on the command line wins (options keep their last value).

std::vector<std::string> config_args(const std::string& path, const Command& cmd) {
    json j;
    try {
        std::ifstream in(path);
        if (!in) throw InputError("cannot open config '" + path + "'");
        j = json::parse(in);
    } catch (const json::exception& e) {
        throw InputError("config '" + path + "' is not valid JSON: " + e.what());
    }
    if (!j.is_object()) throw InputError("config '" + path + "' must be a JSON object");
    std::vector<std::string> args;
    for (const auto& [key, value] : j.items()) {
        if (!cmd.fields.contains(key))
            throw InputError("unknown config key '" + key + "' for '" + cmd.app->get_name() + "'");
        std::string text;
        if (value.is_string())
            text = value.get<std::string>();
        else if (value.is_number_unsigned() || value.is_number_integer())
            text = value.dump();
        else if (value.is_number_float())
            text = format_number(value.get<double>());
        else
            throw InputError("config key '" + key + "' must be a string or a number");
        args.push_back("--" + key);
        args.push_back(text);
    }
    return args;
}

// Splits "--config PATH" / "--config=PATH" out of the arguments.
std::string take_config(std::vector<std::string>& args) {
    std::string path;
    for (std::size_t i = 0; i < args.size();) {
        if (args[i] == "--config") {
            if (i + 1 >= args.size()) throw InputError("--config needs a file");
            path = args[i + 1];
            args.erase(args.begin() + static_cast<std::ptrdiff_t>(i), args.begin() + static_cast<std::ptrdiff_t>(i + 2));
        } else if (args[i].starts_with("--config=")) {
            path = args[i].substr(9);
            args.erase(args.begin() + static_cast<std::ptrdiff_t>(i));
        } else {
            ++i;
        }
    }
    return path;
}

int dispatch(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Weight-side channel importance, grouping and toy-codec experiments", "iscs"};
    app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    app.require_subcommand(1);
    std::vector<std::unique_ptr<Command>> cmds;
    add_analyze(app, cmds);
    add_discover(app, cmds);
    add_fit(app, cmds);
    add_encode(app, cmds);
    add_decode(app, cmds);
    add_ablate(app, cmds);
    add_schedule(app, cmds);
    add_synth_images(app, cmds);
    add_synth_weights(app, cmds);
    for (auto& c : cmds) c->app->add_option("--config", "JSON file of option values; command-line flags win");

    const std::string config = take_config(args);
    if (!config.empty()) {
        const Command* target = nullptr;
        if (!args.empty())
            for (const auto& c : cmds)
                if (c->app->get_name() == args.front()) target = c.get();
        if (!target) throw InputError("--config needs a subcommand");
        auto extra = config_args(config, *target);
        args.insert(args.begin() + 1, extra.begin(), extra.end());
    }

    try {
        std::reverse(args.begin(), args.end());
        app.parse(args);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitInput;
    }
    for (const auto& c : cmds)
        if (c->app->parsed()) c->action(*c, out);
    return kExitOk;
}

} // namespace

bool glob_match(const std::string& pattern, const std::string& text) {
    std::size_t p = 0, t = 0, star = std::string::npos, mark = 0;
    while (t < text.size()) {
        if (p < pattern.size() && (pattern[p] == '?' || pattern[p] == text[t])) {
            ++p;
            ++t;
        } else if (p < pattern.size() && pattern[p] == '*') {
            star = p++;
            mark = t;
        } else if (star != std::string::npos) {
            p = star + 1;
            t = ++mark;
        } else {
            return false;
        }
    }
    while (p < pattern.size() && pattern[p] == '*') ++p;
    return p == pattern.size();
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    try {
        return dispatch(args, out, err);
    } catch (const IntegrityError& e) {
        err << "integrity error: " << e.what() << "\n";
        return kExitIntegrity;
    } catch (const InputError& e) {
        err << "error: " << e.what() << "\n";
        return kExitInput;
    } catch (const InvariantError& e) {
        err << "internal error: " << e.what() << "\n";
        return kExitInternal;
    } catch (const std::filesystem::filesystem_error& e) {
        err << "error: " << e.what() << "\n";
        return kExitInput;
    } catch (const std::exception& e) {
        err << "internal error: " << e.what() << "\n";
        return kExitInternal;
    }
}

} // namespace iscs::cli
