#include "hifnet/cli.hpp"

#include "hifnet/binary_io.hpp"
#include "hifnet/checkpoint.hpp"
#include "hifnet/dataset.hpp"
#include "hifnet/eval.hpp"
#include "hifnet/gradcheck.hpp"
#include "hifnet/trainer.hpp"

#include "CLI11.hpp"

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>

namespace hifnet::cli {

namespace fs = std::filesystem;

namespace {

std::string str(const json& args, const char* key) {
    if (!args.contains(key) || !args.at(key).is_string()) {
        throw UsageError(std::string("missing argument '") + key + "'");
    }
    return args.at(key).get<std::string>();
}

std::string str_or(const json& args, const char* key, const std::string& fallback) {
    return args.contains(key) && args.at(key).is_string() ? args.at(key).get<std::string>() : fallback;
}

json new_manifest(const std::string& command, const json& args) {
    return {{"tool", "hifnet"},
            {"tool_version", kToolVersion},
            {"command", command},
            {"args", args},
            {"seeds", json::object()},
            {"artifacts", json::object()}};
}

void record_artifact(json& manifest, const fs::path& path) {
    manifest["artifacts"][path.string()] = io::file_checksum(path);
}

void write_text(const fs::path& path, const std::string& text) {
    if (path.has_parent_path()) {
        fs::create_directories(path.parent_path());
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw DataError("cannot write " + path.string());
    }
    out << text;
}

void write_manifest(const json& manifest, const fs::path& path) { write_text(path, manifest.dump(2) + "\n"); }

fs::path sibling(const fs::path& path, const std::string& suffix) { return fs::path(path.string() + suffix); }

train::EpochCallback progress(std::ostream& log, const std::string& tag, int total) {
    return [&log, tag, total](const train::EpochRecord& r) {
        if (r.epoch == 1 || r.epoch % 25 == 0 || r.epoch == total) {
            char line[160];
            std::snprintf(line, sizeof line, "[%s] epoch %4d  train %.4f  val %.4f  val acc %.4f\n", tag.c_str(),
                          r.epoch, r.train_loss, r.val_loss, r.val_accuracy);
            log << line << std::flush;
        }
    };
}

nn::TrainingMetadata metadata_for(const train::TrainingRun& run, std::uint64_t dataset_seed) {
    nn::TrainingMetadata meta;
    meta.epochs_trained = static_cast<std::uint32_t>(run.records.size());
    if (!run.records.empty()) {
        meta.final_train_loss = run.records.back().train_loss;
        meta.final_val_loss = run.records.back().val_loss;
    }
    meta.dataset_seed = dataset_seed;
    return meta;
}

json run_summary(const train::TrainingRun& run) {
    json s = {{"epochs", run.records.size()}, {"convergence_epoch", run.convergence_epoch}};
    if (!run.records.empty()) {
        s["final_train_loss"] = run.records.back().train_loss;
        s["final_val_loss"] = run.records.back().val_loss;
    }
    return s;
}

json report_json(const eval::EvalReport& r) {
    return {{"model", r.model_name},
            {"tp", r.matrix.tp},
            {"fp", r.matrix.fp},
            {"fn", r.matrix.fn},
            {"tn", r.matrix.tn},
            {"accuracy", r.accuracy}};
}

// Shared by replicate: train a spec on a dataset file, write checkpoint + curves.
train::TrainingRun train_and_save(const nn::Model& model, const wave::Dataset& data, const train::TrainConfig& cfg,
                                  const fs::path& ckpt, const fs::path& curves, bool wall_clock, json& manifest,
                                  std::ostream& log, const std::string& tag) {
    auto run = train::train(model, data, cfg, progress(log, tag, cfg.epochs));
    nn::save_checkpoint(run.model, metadata_for(run, data.master_seed), ckpt);
    write_text(curves, train::curves_csv(run.records, wall_clock));
    record_artifact(manifest, ckpt);
    record_artifact(manifest, curves);
    return run;
}

} // namespace

ExitCode exit_code_for(const std::exception& e) {
    if (dynamic_cast<const UsageError*>(&e)) {
        return ExitCode::Usage;
    }
    if (dynamic_cast<const DivergenceError*>(&e)) {
        return ExitCode::Divergence;
    }
    if (dynamic_cast<const FingerprintError*>(&e)) {
        return ExitCode::Fingerprint;
    }
    if (dynamic_cast<const DataError*>(&e)) {
        return ExitCode::Data;
    }
    if (dynamic_cast<const ConfigError*>(&e) || dynamic_cast<const ShapeError*>(&e)) {
        return ExitCode::Config;
    }
    return ExitCode::Usage;
}

json cmd_gen(const json& args, std::ostream& log) {
    const auto config = config::gen_config_from_json(args.at("config"));
    const fs::path out = str(args, "out");
    auto manifest = new_manifest("gen", args);
    manifest["seeds"]["dataset"] = config.seed;

    const auto d = wave::build_dataset(config, config.seed);
    wave::write_dataset(d, out);
    record_artifact(manifest, out);
    log << "wrote " << d.size() << " windows (" << d.count(wave::Label::Hif) << " HIF, "
        << d.count(wave::Label::Normal) << " normal) to " << out.string() << "\n";
    write_manifest(manifest, sibling(out, ".manifest.json"));
    return manifest;
}

json cmd_split(const json& args, std::ostream& log) {
    const auto d = wave::read_dataset(str(args, "data"));
    const double fraction = args.at("train_fraction").get<double>();
    const auto seed = args.at("seed").get<std::uint64_t>();
    const fs::path first = str(args, "train_out");
    const fs::path second = str(args, "test_out");
    auto manifest = new_manifest("split", args);
    manifest["seeds"]["split"] = seed;

    const auto [a, b] = wave::split(d, fraction, seed);
    wave::write_dataset(a, first);
    wave::write_dataset(b, second);
    record_artifact(manifest, first);
    record_artifact(manifest, second);
    log << "split " << d.size() << " windows into " << a.size() << " / " << b.size() << "\n";
    write_manifest(manifest, sibling(first, ".manifest.json"));
    return manifest;
}

json cmd_train(const json& args, std::ostream& log) {
    const auto data = wave::read_dataset(str(args, "data"));
    const auto spec = config::model_spec_from_json(args.at("model"));
    const auto cfg = config::train_config_from_json(args.at("train"), train::TrainConfig::defaults_for(spec));
    const fs::path out = str(args, "out");
    const fs::path curves = str_or(args, "curves", sibling(out, ".curves.csv").string());
    auto manifest = new_manifest("train", args);
    manifest["seeds"] = {{"init", cfg.seed}, {"shuffle", cfg.seed}, {"dataset", data.master_seed}};

    const auto run = train_and_save(nn::Model::build(spec, cfg.seed), data, cfg, out, curves,
                                    args.value("wall_clock", false), manifest, log, nn::architecture_name(spec));
    manifest["summary"] = run_summary(run);
    write_manifest(manifest, sibling(out, ".manifest.json"));
    return manifest;
}

json cmd_finetune(const json& args, std::ostream& log) {
    const fs::path source = str(args, "checkpoint");
    const auto ckpt = nn::load_checkpoint(source);
    const auto data = wave::read_dataset(str(args, "data"));
    const bool scratch = args.value("scratch", false);
    const auto cfg = config::train_config_from_json(args.at("train"), train::TrainConfig::defaults_for(ckpt.spec));
    const fs::path out = str(args, "out");
    const fs::path curves = str_or(args, "curves", sibling(out, ".curves.csv").string());
    auto manifest = new_manifest("finetune", args);
    manifest["seeds"] = {{"shuffle", cfg.seed}, {"dataset", data.master_seed}};

    nn::Model start = scratch ? nn::Model::build(ckpt.spec, cfg.seed) : nn::restore_for_transfer(ckpt, ckpt.spec);
    if (scratch) {
        manifest["seeds"]["init"] = cfg.seed;
    }
    auto run = train::train(start, data, cfg, progress(log, scratch ? "scratch" : "transfer", cfg.epochs));
    if (run.records.empty() && !scratch) {
        // Nothing trained: the output is the source checkpoint unchanged.
        io::write_file(out, nn::encode_checkpoint(ckpt));
    } else {
        nn::save_checkpoint(run.model, metadata_for(run, data.master_seed), out);
    }
    write_text(curves, train::curves_csv(run.records, args.value("wall_clock", false)));
    record_artifact(manifest, out);
    record_artifact(manifest, curves);
    manifest["summary"] = run_summary(run);
    write_manifest(manifest, sibling(out, ".manifest.json"));
    return manifest;
}

json cmd_eval(const json& args, std::ostream& log) {
    const auto data = wave::read_dataset(str(args, "data"));
    if (data.empty()) {
        throw UsageError("evaluation dataset is empty");
    }
    const auto& paths = args.at("checkpoints");
    if (!paths.is_array() || paths.empty()) {
        throw UsageError("eval needs at least one checkpoint");
    }
    const double threshold = args.value("threshold", 0.5);
    const json names = args.value("names", json::array());
    auto manifest = new_manifest("eval", args);

    std::vector<eval::EvalReport> reports;
    for (std::size_t i = 0; i < paths.size(); ++i) {
        const fs::path p = paths[i].get<std::string>();
        const auto model = nn::model_from_checkpoint(nn::load_checkpoint(p));
        const std::string name = i < names.size() ? names[i].get<std::string>() : p.stem().string();
        reports.push_back(eval::evaluate(model, data.windows, threshold, name, str(args, "data")));
    }
    log << eval::render_table(reports);

    json summary = json::array();
    for (const auto& r : reports) {
        summary.push_back(report_json(r));
    }
    manifest["summary"] = summary;
    const auto out = str_or(args, "out", "");
    if (!out.empty()) {
        write_text(out, eval::render_csv(reports));
        record_artifact(manifest, out);
        write_manifest(manifest, sibling(out, ".manifest.json"));
    }
    return manifest;
}

json cmd_gradcheck(const json& args, std::ostream& log) {
    const auto spec = config::model_spec_from_json(args.at("model"));
    const auto seed = args.value("seed", std::uint64_t{1});
    const bool corrupt = args.value("corrupt_backward", false);
    auto manifest = new_manifest("gradcheck", args);
    manifest["seeds"]["init"] = seed;

    auto layers = nn::check_all_layers(seed);

    // One HIF and one normal window from the source profile.
    const auto gen = wave::gen_profile("case1");
    std::vector<wave::Window> windows;
    for (std::size_t i = 0; i < 2; ++i) {
        const auto plan = wave::plan_window(gen, seed, i);
        windows.push_back(plan.label == wave::Label::Hif
                              ? wave::synth_hif_window(plan.scenario, plan.hif, plan.seed)
                              : wave::synth_transient_window(plan.scenario, plan.transient, plan.seed));
    }
    nn::GradientTamper tamper;
    if (corrupt) {
        // Negative control: flip the sign of the largest gradient entry.
        tamper = [](std::vector<double>& g) {
            auto it = std::max_element(g.begin(), g.end(), [](double a, double b) { return std::abs(a) < std::abs(b); });
            *it = -*it;
        };
    }
    const auto model = nn::grad_check(nn::Model::build(spec, seed), windows, tamper);

    char line[256];
    std::snprintf(line, sizeof line, "layers: max relative error %.3e over %zu entries\n", layers.max_relative_error,
                  layers.checked);
    log << line;
    std::snprintf(line, sizeof line, "%s model: max relative error %.3e over %zu parameters\n",
                  nn::architecture_name(spec).c_str(), model.max_relative_error, model.checked);
    log << line;
    const bool ok = layers.passed() && model.passed();
    log << (ok ? "PASS" : "FAIL") << " (tolerance " << nn::kGradCheckTolerance << ")\n";
    if (!ok) {
        log << "worst: " << (layers.passed() ? model.worst : layers.worst) << "\n";
    }
    manifest["summary"] = {{"layers_max_relative_error", layers.max_relative_error},
                           {"model_max_relative_error", model.max_relative_error},
                           {"passed", ok}};
    const auto out = str_or(args, "out", "");
    if (!out.empty()) {
        write_manifest(manifest, out);
    }
    return manifest;
}

json replicate_defaults(const std::string& which, const std::string& out_dir) {
    const nn::ModelSpec cnn = nn::CnnSpec::defaults();
    const nn::ModelSpec mlp = nn::MlpSpec::defaults();
    if (which == "case1") {
        auto cnn_cfg = train::TrainConfig::defaults_for(cnn);
        auto mlp_cfg = train::TrainConfig::defaults_for(mlp);
        cnn_cfg.seed = 11;
        mlp_cfg.seed = 12;
        return {{"case", "case1"},
                {"out_dir", out_dir},
                {"gen", config::to_json(wave::gen_profile("case1"))},
                {"train_fraction", 0.8},
                {"split_seed", 101},
                {"threshold", 0.5},
                {"cnn", {{"model", config::to_json(cnn)}, {"train", config::to_json(cnn_cfg)}}},
                {"mlp", {{"model", config::to_json(mlp)}, {"train", config::to_json(mlp_cfg)}}}};
    }
    if (which == "case2") {
        auto transfer = train::TrainConfig::defaults_for(cnn);
        transfer.epochs = 50;
        transfer.seed = 21;
        transfer.freeze_conv = true; // reuse the learned feature extractor, retrain the head
        auto scratch = train::TrainConfig::defaults_for(cnn);
        scratch.epochs = 400;
        scratch.seed = 21;
        return {{"case", "case2"},
                {"out_dir", out_dir},
                {"gen", config::to_json(wave::gen_profile("case2"))},
                {"train_fraction", 0.5},
                {"split_seed", 202},
                {"threshold", 0.5},
                {"source_checkpoint", ""},
                {"case1", replicate_defaults("case1", (fs::path(out_dir) / "case1").string())},
                {"transfer", config::to_json(transfer)},
                {"scratch", config::to_json(scratch)}};
    }
    throw UsageError("unknown replication '" + which + "' (expected case1 or case2)");
}

namespace {

json replicate_case1(const json& args, std::ostream& log) {
    const fs::path dir = str(args, "out_dir");
    auto manifest = new_manifest("replicate", args);
    const auto gen = config::gen_config_from_json(args.at("gen"));
    const auto split_seed = args.at("split_seed").get<std::uint64_t>();
    const double threshold = args.value("threshold", 0.5);
    manifest["seeds"] = {{"dataset", gen.seed}, {"split", split_seed}};

    const auto full = wave::build_dataset(gen, gen.seed);
    wave::write_dataset(full, dir / "case1.dataset");
    record_artifact(manifest, dir / "case1.dataset");
    const auto [fit, test] = wave::split(full, args.at("train_fraction").get<double>(), split_seed);
    wave::write_dataset(fit, dir / "case1_train.dataset");
    wave::write_dataset(test, dir / "case1_test.dataset");
    record_artifact(manifest, dir / "case1_train.dataset");
    record_artifact(manifest, dir / "case1_test.dataset");
    log << "case1: " << full.size() << " windows, " << fit.size() << " train/val, " << test.size() << " test\n";

    std::vector<eval::EvalReport> reports;
    json runs = json::object();
    for (const char* arch : {"cnn", "mlp"}) {
        const auto& sub = args.at(arch);
        const auto spec = config::model_spec_from_json(sub.at("model"));
        const auto cfg = config::train_config_from_json(sub.at("train"), train::TrainConfig::defaults_for(spec));
        manifest["seeds"][std::string(arch) + "_init"] = cfg.seed;
        const auto run = train_and_save(nn::Model::build(spec, cfg.seed), fit, cfg, dir / (std::string(arch) + ".ckpt"),
                                        dir / (std::string(arch) + "_curves.csv"), false, manifest, log, arch);
        reports.push_back(eval::evaluate(run.model, test.windows, threshold, arch == std::string("cnn") ? "CNN-based" : "MLP-based",
                                         "case1_test"));
        runs[arch] = run_summary(run);
        runs[arch]["accuracy"] = reports.back().accuracy;
    }
    const auto table = eval::render_table(reports);
    log << table;
    write_text(dir / "report.txt", table);
    write_text(dir / "report.csv", eval::render_csv(reports));
    record_artifact(manifest, dir / "report.csv");
    manifest["summary"] = runs;
    write_manifest(manifest, dir / "manifest.json");
    return manifest;
}

json replicate_case2(const json& args, std::ostream& log) {
    const fs::path dir = str(args, "out_dir");
    auto manifest = new_manifest("replicate", args);
    fs::path source = str_or(args, "source_checkpoint", "");
    if (source.empty()) {
        log << "case2: no source checkpoint given, running case1 first\n";
        const auto case1 = replicate_case1(args.at("case1"), log);
        for (const auto& [path, crc] : case1.at("artifacts").items()) {
            manifest["artifacts"][path] = crc;
        }
        source = fs::path(str(args.at("case1"), "out_dir")) / "cnn.ckpt";
    }
    const auto ckpt = nn::load_checkpoint(source);
    const auto gen = config::gen_config_from_json(args.at("gen"));
    const auto split_seed = args.at("split_seed").get<std::uint64_t>();
    const double threshold = args.value("threshold", 0.5);
    manifest["seeds"] = {{"dataset", gen.seed}, {"split", split_seed}};

    const auto full = wave::build_dataset(gen, gen.seed);
    wave::write_dataset(full, dir / "case2.dataset");
    record_artifact(manifest, dir / "case2.dataset");
    const auto [fit, test] = wave::split(full, args.at("train_fraction").get<double>(), split_seed);
    wave::write_dataset(fit, dir / "case2_train.dataset");
    wave::write_dataset(test, dir / "case2_test.dataset");
    record_artifact(manifest, dir / "case2_train.dataset");
    record_artifact(manifest, dir / "case2_test.dataset");
    log << "case2: " << full.size() << " windows, " << fit.size() << " train/val, " << test.size() << " test\n";

    const auto base = train::TrainConfig::defaults_for(ckpt.spec);
    const auto transfer_cfg = config::train_config_from_json(args.at("transfer"), base);
    const auto scratch_cfg = config::train_config_from_json(args.at("scratch"), base);
    manifest["seeds"]["transfer_shuffle"] = transfer_cfg.seed;
    manifest["seeds"]["scratch_init"] = scratch_cfg.seed;

    const auto scratch = train_and_save(nn::Model::build(ckpt.spec, scratch_cfg.seed), fit, scratch_cfg,
                                        dir / "scratch.ckpt", dir / "scratch_curves.csv", false, manifest, log,
                                        "scratch");
    const auto transfer = train_and_save(nn::restore_for_transfer(ckpt, ckpt.spec), fit, transfer_cfg,
                                         dir / "transfer.ckpt", dir / "transfer_curves.csv", false, manifest, log,
                                         "transfer");

    std::vector<eval::EvalReport> reports{
        eval::evaluate(scratch.model, test.windows, threshold, "Random initialization", "case2_test"),
        eval::evaluate(transfer.model, test.windows, threshold, "Transfer learning", "case2_test")};
    auto table = eval::render_table(reports);
    table += "convergence epoch: random initialization " + std::to_string(scratch.convergence_epoch) +
             ", transfer learning " + std::to_string(transfer.convergence_epoch) + "\n";
    log << table;
    write_text(dir / "report.txt", table);
    write_text(dir / "report.csv", eval::render_csv(reports));
    record_artifact(manifest, dir / "report.csv");

    json summary = {{"scratch", run_summary(scratch)}, {"transfer", run_summary(transfer)}};
    summary["scratch"]["accuracy"] = reports[0].accuracy;
    summary["transfer"]["accuracy"] = reports[1].accuracy;
    manifest["summary"] = summary;
    write_manifest(manifest, dir / "manifest.json");
    return manifest;
}

} // namespace

json cmd_replicate(const json& args, std::ostream& log) {
    const auto which = str(args, "case");
    if (which == "case1") {
        return replicate_case1(args, log);
    }
    if (which == "case2") {
        return replicate_case2(args, log);
    }
    throw UsageError("unknown replication '" + which + "'");
}

json execute(const std::string& command, const json& args, std::ostream& log) {
    if (command == "gen") {
        return cmd_gen(args, log);
    }
    if (command == "split") {
        return cmd_split(args, log);
    }
    if (command == "train") {
        return cmd_train(args, log);
    }
    if (command == "finetune") {
        return cmd_finetune(args, log);
    }
    if (command == "eval") {
        return cmd_eval(args, log);
    }
    if (command == "gradcheck") {
        return cmd_gradcheck(args, log);
    }
    if (command == "replicate") {
        return cmd_replicate(args, log);
    }
    throw UsageError("unknown command '" + command + "'");
}

bool replay(const json& manifest, std::ostream& log) {
    if (!manifest.contains("command") || !manifest.contains("args")) {
        throw UsageError("not a manifest: missing command or args");
    }
    const auto rerun = execute(manifest.at("command").get<std::string>(), manifest.at("args"), log);
    bool ok = true;
    const auto recorded = manifest.value("artifacts", json::object());
    for (const auto& [path, crc] : recorded.items()) {
        const auto now = rerun.at("artifacts").value(path, std::string("missing"));
        if (now != crc.get<std::string>()) {
            log << "MISMATCH " << path << ": recorded " << crc.get<std::string>() << ", replayed " << now << "\n";
            ok = false;
        }
    }
    log << (ok ? "replay reproduced every artifact checksum\n" : "replay diverged from the manifest\n");
    return ok;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"hifnet: high-impedance fault waveform synthesis, CNN/MLP training and transfer"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(kToolVersion));

    std::string config_path, out_path, data_path, model_name = "cnn", checkpoint_path, curves_path, profile;
    std::optional<std::uint64_t> seed;
    std::optional<int> epochs;
    std::optional<double> lr;
    std::optional<std::size_t> batch;
    std::optional<double> threshold;
    bool freeze_conv = false, scratch = false, wall_clock = false, corrupt = false;

    auto* gen = app.add_subcommand("gen", "generate a labelled waveform dataset");
    gen->add_option("--profile", profile, "built-in profile: case1 or case2");
    gen->add_option("--config", config_path, "generation config (JSON)");
    gen->add_option("--seed", seed, "master seed (overrides config)");
    gen->add_option("--out", out_path, "dataset output path")->required();

    double fraction = 0.8;
    std::string test_out;
    auto* split = app.add_subcommand("split", "stratified split of a dataset file");
    split->add_option("--data", data_path, "dataset to split")->required();
    split->add_option("--fraction", fraction, "fraction kept on the first side");
    split->add_option("--seed", seed, "shuffle seed");
    split->add_option("--train-out", out_path, "first side output")->required();
    split->add_option("--test-out", test_out, "second side output")->required();

    auto add_training_flags = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "training config (JSON)");
        sub->add_option("--seed", seed, "init/shuffle seed");
        sub->add_option("--epochs", epochs, "epoch budget");
        sub->add_option("--lr", lr, "learning rate");
        sub->add_option("--batch", batch, "mini-batch size");
        sub->add_option("--out", out_path, "checkpoint output path")->required();
        sub->add_option("--curves", curves_path, "per-epoch CSV (default <out>.curves.csv)");
        sub->add_flag("--wall-clock", wall_clock, "fill the seconds column of the curves CSV");
    };
    auto* trn = app.add_subcommand("train", "train a model from random initialization");
    trn->add_option("--data", data_path, "training dataset")->required();
    trn->add_option("--model", model_name, "cnn, mlp, or a spec JSON path");
    add_training_flags(trn);

    auto* ft = app.add_subcommand("finetune", "continue training a checkpoint on a new dataset");
    ft->add_option("--checkpoint", checkpoint_path, "source checkpoint")->required();
    ft->add_option("--data", data_path, "target dataset")->required();
    ft->add_flag("--freeze-conv", freeze_conv, "keep conv-block parameters fixed");
    ft->add_flag("--scratch", scratch, "ignore the checkpoint weights and start from random initialization");
    add_training_flags(ft);

    std::vector<std::string> checkpoints, names;
    auto* ev = app.add_subcommand("eval", "confusion matrix and accuracy for one or more checkpoints");
    ev->add_option("--checkpoint", checkpoints, "checkpoint(s) to evaluate")->required();
    ev->add_option("--name", names, "column name per checkpoint");
    ev->add_option("--data", data_path, "test dataset")->required();
    ev->add_option("--threshold", threshold, "decision threshold (default 0.5)");
    ev->add_option("--out", out_path, "report CSV path");

    auto* gc = app.add_subcommand("gradcheck", "finite-difference gradient check");
    gc->add_option("--model", model_name, "cnn, mlp, or a spec JSON path");
    gc->add_option("--seed", seed, "initialization seed");
    gc->add_flag("--corrupt-backward", corrupt, "negative control: tamper with the analytic gradient");
    gc->add_option("--out", out_path, "manifest output path");

    std::string which, source;
    std::optional<std::uint64_t> train_seed;
    auto* rep = app.add_subcommand("replicate", "run a full case study (case1 or case2)");
    rep->add_option("case", which, "case1 or case2")->required();
    rep->add_option("--out", out_path, "output directory")->required();
    rep->add_option("--config", config_path, "JSON object merged over the default replication arguments");
    rep->add_option("--seed", seed, "dataset seed");
    rep->add_option("--train-seed", train_seed, "training seed for every run");
    rep->add_option("--epochs", epochs, "epoch budget for every run");
    rep->add_option("--source", source, "case2: source checkpoint (default: run case1 first)");
    rep->add_option("--threshold", threshold, "decision threshold");

    std::string manifest_path;
    auto* rp = app.add_subcommand("replay", "re-run a manifest and verify artifact checksums");
    rp->add_option("manifest", manifest_path, "manifest JSON")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err);
    }

    auto training_json = [&](const nn::ModelSpec& spec, train::TrainConfig base) {
        if (!config_path.empty()) {
            base = config::train_config_from_json(config::load_json(config_path), base);
        }
        if (seed) base.seed = *seed;
        if (epochs) base.epochs = *epochs;
        if (lr) base.learning_rate = *lr;
        if (batch) base.batch_size = *batch;
        if (freeze_conv) base.freeze_conv = true;
        train::validate(base);
        (void)spec;
        return config::to_json(base);
    };

    try {
        std::string command;
        json args;
        if (*gen) {
            command = "gen";
            wave::GenConfig c;
            if (!config_path.empty()) {
                c = config::gen_config_from_json(config::load_json(config_path));
            } else {
                c = wave::gen_profile(profile.empty() ? "case1" : profile);
            }
            if (seed) c.seed = *seed;
            args = {{"config_path", config_path}, {"config", config::to_json(c)}, {"out", out_path}};
        } else if (*split) {
            command = "split";
            args = {{"data", data_path},
                    {"train_fraction", fraction},
                    {"seed", seed.value_or(0)},
                    {"train_out", out_path},
                    {"test_out", test_out}};
        } else if (*trn) {
            command = "train";
            const auto spec = config::resolve_model_spec(model_name);
            args = {{"data", data_path},
                    {"model", config::to_json(spec)},
                    {"config_path", config_path},
                    {"train", training_json(spec, train::TrainConfig::defaults_for(spec))},
                    {"out", out_path},
                    {"wall_clock", wall_clock}};
            if (!curves_path.empty()) args["curves"] = curves_path;
        } else if (*ft) {
            command = "finetune";
            const auto ckpt = nn::load_checkpoint(checkpoint_path);
            auto base = train::TrainConfig::defaults_for(ckpt.spec);
            base.epochs = scratch ? 400 : 50;
            args = {{"checkpoint", checkpoint_path},
                    {"data", data_path},
                    {"config_path", config_path},
                    {"train", training_json(ckpt.spec, base)},
                    {"scratch", scratch},
                    {"out", out_path},
                    {"wall_clock", wall_clock}};
            if (!curves_path.empty()) args["curves"] = curves_path;
        } else if (*ev) {
            command = "eval";
            args = {{"checkpoints", checkpoints},
                    {"names", names},
                    {"data", data_path},
                    {"threshold", threshold.value_or(0.5)},
                    {"out", out_path}};
        } else if (*gc) {
            command = "gradcheck";
            args = {{"model", config::to_json(config::resolve_model_spec(model_name))},
                    {"seed", seed.value_or(1)},
                    {"corrupt_backward", corrupt},
                    {"out", out_path}};
        } else if (*rep) {
            command = "replicate";
            args = replicate_defaults(which, out_path);
            if (!config_path.empty()) {
                args.merge_patch(config::load_json(config_path));
                args["out_dir"] = out_path;
            }
            if (seed) args["gen"]["seed"] = *seed;
            if (threshold) args["threshold"] = *threshold;
            auto patch_train = [&](json& t, int default_epochs) {
                if (train_seed) t["seed"] = *train_seed;
                if (epochs) t["epochs"] = *epochs;
                (void)default_epochs;
            };
            auto patch_case1 = [&](json& a) {
                patch_train(a["cnn"]["train"], 150);
                patch_train(a["mlp"]["train"], 150);
            };
            if (which == "case1") {
                patch_case1(args);
            } else {
                patch_train(args["transfer"], 50);
                patch_train(args["scratch"], 400);
                patch_case1(args["case1"]);
                if (!source.empty()) {
                    args["source_checkpoint"] = source;
                }
            }
        } else if (*rp) {
            const auto manifest = config::load_json(manifest_path);
            return replay(manifest, out) ? 0 : static_cast<int>(ExitCode::CheckFailed);
        }

        const auto manifest = execute(command, args, out);
        if (command == "gradcheck" && !manifest.at("summary").at("passed").get<bool>()) {
            return static_cast<int>(ExitCode::CheckFailed);
        }
        return 0;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return static_cast<int>(exit_code_for(e));
    }
}

} // namespace hifnet::cli
