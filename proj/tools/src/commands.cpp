#include "fishdet/cli/commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <map>
#include <ostream>
#include <set>

#include <CLI11.hpp>
#include <httplib.h>
#include <spdlog/spdlog.h>

#include "fishdet/cli/review.hpp"
#include "fishdet/colormap.hpp"
#include "fishdet/config.hpp"
#include "fishdet/dataset.hpp"
#include "fishdet/detector.hpp"
#include "fishdet/error.hpp"
#include "fishdet/labels.hpp"
#include "fishdet/letterbox.hpp"
#include "fishdet/network.hpp"
#include "fishdet/weights.hpp"

namespace fs = std::filesystem;

namespace fishdet::cli {

namespace {

std::shared_ptr<const WeightedNetwork> open_model(const ModelArgs& m) {
    LoadOptions opts;
    opts.allow_partial = m.allow_partial;
    return load_model(m.config, m.weights, opts);
}

std::vector<std::string> expand_inputs(const std::vector<std::string>& inputs) {
    std::vector<std::string> images;
    for (const auto& in : inputs) {
        if (fs::is_directory(in)) {
            const auto found = scan_images(in);
            images.insert(images.end(), found.begin(), found.end());
        } else if (fs::exists(in)) {
            images.push_back(in);
        } else {
            throw Error(Errc::IoError, "input '" + in + "' does not exist");
        }
    }
    if (images.empty()) throw Error(Errc::EmptyDataset, "no input images");
    return images;
}

void draw_detections(Image& image, const std::vector<Detection>& dets) {
    for (const auto& d : dets) {
        draw_rectangle(image, static_cast<int>(std::lround(d.box.left())), static_cast<int>(std::lround(d.box.top())),
                       static_cast<int>(std::lround(d.box.right())), static_cast<int>(std::lround(d.box.bottom())),
                       Rgb{255, 48, 48});
    }
}

std::string stem_with(std::size_t layer, const char* fmt, std::size_t index) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), fmt, layer, index);
    return buf;
}

}  // namespace

std::string feature_map_stem(std::size_t layer_1based, std::size_t map) {
    return stem_with(layer_1based, "L%03zu_m%03zu", map);
}

std::string component_stem(std::size_t layer_1based, std::size_t k) {
    return stem_with(layer_1based, "L%03zu_pc%zu", k);
}

int run_detect(const DetectArgs& args, std::ostream& out) {
    DetectOptions opts;
    opts.conf_threshold = args.conf;
    opts.nms_threshold = args.nms;
    opts.exec.workers = args.model.workers;
    const Detector detector(open_model(args.model), opts);
    const auto images = expand_inputs(args.inputs);
    fs::create_directories(args.out_dir);
    std::size_t total = 0;
    for (const auto& path : images) {
        auto image = read_image(path);
        const auto result = detector.detect(image);
        const auto stem = (fs::path(args.out_dir) / fs::path(path).stem()).string();
        write_file_atomic(stem + ".txt", format_detections(result.detections));
        draw_detections(image, result.detections);
        write_image(stem + ".png", image);
        total += result.detections.size();
        out << path << ": " << result.detections.size() << " detections\n";
    }
    out << "images: " << images.size() << ", detections: " << total << '\n';
    return 0;
}

int run_eval(const EvalArgs& args, std::ostream& out) {
    DatasetEvalOptions opts;
    opts.metrics.iou_threshold = args.iou;
    opts.metrics.conf_threshold = args.conf;
    opts.workers = args.model.workers;
    if (args.split != "all") {
        const auto split = split_from(args.split);
        if (!split) throw Error(Errc::InvalidValue, "unknown split '" + args.split + "'");
        opts.split = *split;
    }
    const auto manifest = load_manifest(args.manifest);
    const Detector detector(open_model(args.model));
    const auto report = evaluate_dataset(detector, manifest, opts);
    fs::create_directories(args.out_dir);
    const fs::path dir(args.out_dir);
    write_file_atomic((dir / "report.json").string(), report_to_json(report));
    write_file_atomic((dir / "report.txt").string(), report_to_text(report));
    write_file_atomic((dir / "pr_curve.csv").string(), pr_curve_csv(report));
    out << report_to_text(report);
    return 0;
}

int run_probe(const ProbeArgs& args, std::ostream& out) {
    if (args.layers.empty()) throw Error(Errc::InvalidValue, "no layers to probe");
    const auto net = open_model(args.model);
    const auto image = read_image(args.image);
    const auto [input, info] = letterbox_preprocess(image, net->def.net.width, net->def.net.height);
    std::set<std::size_t> probe;
    for (auto l : args.layers) {
        if (l < 1) throw Error(Errc::IndexOutOfRange, "layers are numbered from 1");
        probe.insert(l - 1);
    }
    ExecOptions exec;
    exec.workers = args.model.workers;
    const auto result = forward(*net, input, probe, exec);

    fs::create_directories(args.out_dir);
    const fs::path dir(args.out_dir);
    std::map<std::size_t, PcaResult> pcas;
    for (const auto& [layer, tensor] : result.probed) {
        const auto maps = feature_maps_from(tensor, layer, args.image);
        const auto n_render = args.max_maps == 0 ? maps.maps.size() : std::min(args.max_maps, maps.maps.size());
        for (std::size_t m = 0; m < n_render; ++m) {
            write_image((dir / (feature_map_stem(layer + 1, m) + ".png")).string(), render(maps.maps[m]));
        }
        const auto pc = pca(unpack(maps));
        for (std::size_t k = 1; k <= std::min(args.top_k, pc.eigenvectors.size()); ++k) {
            write_image((dir / (component_stem(layer + 1, k) + ".png")).string(),
                        render(component_image(maps, pc, k)));
        }
        out << "layer " << layer + 1 << ": " << maps.maps.size() << " maps " << maps.height << "x" << maps.width
            << ", r1 = " << pc.ratios[0] << (pc.degenerate ? " (degenerate)" : "") << '\n';
        pcas.emplace(layer, pc);
    }
    const auto report = variance_report(pcas, args.top_k);
    write_file_atomic((dir / "variance.csv").string(), variance_report_csv(report));
    write_file_atomic((dir / "variance.json").string(), variance_report_json(report));
    return 0;
}

int run_pseudolabel(const PseudoLabelArgs& args, std::ostream& out) {
    const Detector detector(open_model(args.model));
    PseudoLabelOptions opts;
    opts.conf_threshold = args.conf;
    opts.workers = args.model.workers;
    auto run = pseudo_label(detector, args.image_dir, args.label_dir, opts);
    if (args.test_fraction && !run.manifest.entries.empty()) {
        const auto provenance = run.manifest.provenance;
        run.manifest = split_dataset(std::move(run.manifest.entries), *args.test_fraction, args.seed);
        run.manifest.provenance = provenance + "; " + run.manifest.provenance;
    }
    const auto manifest_path =
        args.manifest.empty() ? (fs::path(args.label_dir) / "manifest.json").string() : args.manifest;
    if (const auto parent = fs::path(manifest_path).parent_path(); !parent.empty()) fs::create_directories(parent);
    save_manifest(run.manifest, manifest_path);
    const auto base = fs::path(manifest_path).parent_path();
    write_file_atomic((base / "summary.json").string(), summary_to_json(run.summary));
    write_file_atomic((base / "summary.txt").string(), summary_to_text(run.summary));
    out << summary_to_text(run.summary) << "manifest: " << manifest_path << '\n';
    return 0;
}

int run_split(const SplitArgs& args, std::ostream& out) {
    auto manifest = load_manifest(args.manifest);
    const auto provenance = manifest.provenance;
    auto split = split_dataset(std::move(manifest.entries), args.test_fraction, args.seed);
    if (!provenance.empty()) split.provenance = provenance + "; " + split.provenance;
    save_manifest(split, args.manifest);
    std::size_t test = 0;
    for (const auto& e : split.entries) test += e.split == Split::Test;
    out << "train: " << split.entries.size() - test << ", test: " << test << '\n';
    return 0;
}

int run_init_weights(const InitWeightsArgs& args, std::ostream& out) {
    const auto def = load_network_config(args.config);
    const auto net = make_random_network(def, args.seed);
    save_weights_file(net, args.out);
    out << "wrote " << args.out << " (" << expected_weight_count(def) << " floats)\n";
    return 0;
}

int run_serve(const ServeArgs& args, std::ostream& out) {
    ReviewSession session(args.manifest, args.audit_log);
    httplib::Server server;
    install_routes(server, session, args.static_dir);
    const int port = args.port == 0 ? server.bind_to_any_port(args.host) : args.port;
    if (args.port != 0 && !server.bind_to_port(args.host, port)) {
        throw Error(Errc::IoError, "cannot bind " + args.host + ":" + std::to_string(port));
    }
    out << "serving " << session.size() << " images on http://" << args.host << ':' << port << std::endl;
    if (!server.listen_after_bind()) throw Error(Errc::IoError, "server stopped with an error");
    return 0;
}

int run_cli(const std::vector<std::string>& argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Single-class YOLOv3 detector with pseudo-labelling and review tools", "fishdet"};
    app.require_subcommand(1);

    auto model_options = [](CLI::App* sub, ModelArgs& m) {
        sub->add_option("--cfg", m.config, "Darknet network config")->required();
        sub->add_option("--weights", m.weights, "Darknet weights file")->required();
        sub->add_flag("--allow-partial", m.allow_partial, "Accept weights covering only the leading layers");
        sub->add_option("--workers", m.workers, "Worker threads (0 = all cores)")->capture_default_str();
    };

    DetectArgs detect;
    auto* detect_cmd = app.add_subcommand("detect", "Detect objects and write annotated images");
    model_options(detect_cmd, detect.model);
    detect_cmd->add_option("inputs", detect.inputs, "Image files or directories")->required();
    detect_cmd->add_option("--out", detect.out_dir, "Output directory")->capture_default_str();
    detect_cmd->add_option("--conf", detect.conf, "Confidence threshold")->capture_default_str()->check(CLI::Range(0.0, 1.0));
    detect_cmd->add_option("--nms", detect.nms, "NMS IOU threshold")->capture_default_str()->check(CLI::Range(0.0, 1.0));

    EvalArgs eval;
    auto* eval_cmd = app.add_subcommand("eval", "Evaluate against a labelled manifest");
    model_options(eval_cmd, eval.model);
    eval_cmd->add_option("--manifest", eval.manifest, "Dataset manifest")->required();
    eval_cmd->add_option("--out", eval.out_dir, "Report directory")->capture_default_str();
    eval_cmd->add_option("--iou", eval.iou, "IOU match threshold")->capture_default_str()->check(CLI::Range(0.0, 1.0));
    eval_cmd->add_option("--conf", eval.conf, "Confidence threshold")->capture_default_str()->check(CLI::Range(0.0, 1.0));
    eval_cmd->add_option("--split", eval.split, "all, train or test")->capture_default_str();

    ProbeArgs probe;
    auto* probe_cmd = app.add_subcommand("probe", "Render hidden-layer feature maps and their PCA");
    model_options(probe_cmd, probe.model);
    probe_cmd->add_option("--image", probe.image, "Input image")->required();
    probe_cmd->add_option("--layers", probe.layers, "1-based layer numbers, e.g. 1,81,82")
        ->required()
        ->delimiter(',');
    probe_cmd->add_option("--out", probe.out_dir, "Output directory")->capture_default_str();
    probe_cmd->add_option("--top-k", probe.top_k, "Principal components to report")->capture_default_str();
    probe_cmd->add_option("--max-maps", probe.max_maps, "Feature maps rendered per layer (0 = all)")
        ->capture_default_str();

    PseudoLabelArgs pseudo;
    auto* pseudo_cmd = app.add_subcommand("pseudolabel", "Write detector output as label files plus a manifest");
    model_options(pseudo_cmd, pseudo.model);
    pseudo_cmd->add_option("--images", pseudo.image_dir, "Image directory")->required();
    pseudo_cmd->add_option("--labels", pseudo.label_dir, "Label output directory")->required();
    pseudo_cmd->add_option("--manifest", pseudo.manifest, "Manifest path (default LABELS/manifest.json)");
    pseudo_cmd->add_option("--conf", pseudo.conf, "Confidence threshold")->capture_default_str()->check(CLI::Range(0.0, 1.0));
    pseudo_cmd->add_option("--test-fraction", pseudo.test_fraction, "Also split train/test")
        ->check(CLI::Range(0.0, 1.0));
    pseudo_cmd->add_option("--seed", pseudo.seed, "Split seed")->capture_default_str();

    SplitArgs split;
    auto* split_cmd = app.add_subcommand("split", "Assign train/test splits in a manifest");
    split_cmd->add_option("--manifest", split.manifest, "Dataset manifest (rewritten in place)")->required();
    split_cmd->add_option("--test-fraction", split.test_fraction, "Test fraction")->capture_default_str();
    split_cmd->add_option("--seed", split.seed, "Shuffle seed")->capture_default_str();

    InitWeightsArgs init;
    auto* init_cmd = app.add_subcommand("init-weights", "Write randomly initialised weights for a config");
    init_cmd->add_option("--cfg", init.config, "Darknet network config")->required();
    init_cmd->add_option("--out", init.out, "Weights file to write")->required();
    init_cmd->add_option("--seed", init.seed, "RNG seed")->capture_default_str();

    ServeArgs serve;
    auto* serve_cmd = app.add_subcommand("serve", "Serve the label review API");
    serve_cmd->add_option("--manifest", serve.manifest, "Dataset manifest")->required();
    serve_cmd->add_option("--port", serve.port, "TCP port (0 picks a free one)")->capture_default_str();
    serve_cmd->add_option("--host", serve.host, "Bind address")->capture_default_str();
    serve_cmd->add_option("--static", serve.static_dir, "Directory of UI assets served at /");
    serve_cmd->add_option("--audit-log", serve.audit_log, "Audit log path (default next to the manifest)");

    std::vector<std::string> reversed(argv.rbegin(), argv.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err);
    }

    try {
        if (*detect_cmd) return run_detect(detect, out);
        if (*eval_cmd) return run_eval(eval, out);
        if (*probe_cmd) return run_probe(probe, out);
        if (*pseudo_cmd) return run_pseudolabel(pseudo, out);
        if (*split_cmd) return run_split(split, out);
        if (*init_cmd) return run_init_weights(init, out);
        if (*serve_cmd) return run_serve(serve, out);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitFailure;
    }
    return kExitFailure;
}

}  // namespace fishdet::cli
