// Command-line front end: transcribe recordings, train and evaluate models,
// run the augmentation experiment grid, and generate synthetic corpora.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "mrt/annotations.hpp"
#include "mrt/audio.hpp"
#include "mrt/augment.hpp"
#include "mrt/baselines.hpp"
#include "mrt/dataset.hpp"
#include "mrt/eval.hpp"
#include "mrt/features.hpp"
#include "mrt/nn.hpp"
#include "mrt/onset.hpp"
#include "mrt/synth.hpp"

namespace {

using namespace mrt;

// ---------------------------------------------------------------------------
// Small shared helpers

std::vector<int> parse_int_list(const std::string& text) {
    std::vector<int> values;
    std::string token;
    std::istringstream in(text);
    while (std::getline(in, token, ',')) {
        const std::size_t a = token.find_first_not_of(" \t");
        const std::size_t b = token.find_last_not_of(" \t");
        if (a == std::string::npos) {
            throw std::runtime_error("empty entry in list '" + text + "'");
        }
        token = token.substr(a, b - a + 1);
        std::size_t used = 0;
        int v = 0;
        try {
            v = std::stoi(token, &used);
        } catch (const std::exception&) {
            throw std::runtime_error("'" + token + "' is not an integer");
        }
        if (used != token.size()) {
            throw std::runtime_error("'" + token + "' is not an integer");
        }
        values.push_back(v);
    }
    return values;
}

// "TRAIN>TEST;TRAIN>TEST" with comma-separated semitone lists. An empty TRAIN
// side means no augmentation; an empty TEST side means the unshifted test set.
std::vector<GridRow> parse_grid(const std::string& text) {
    std::vector<GridRow> grid;
    std::string row_text;
    std::istringstream rows(text);
    while (std::getline(rows, row_text, ';')) {
        if (row_text.empty()) {
            continue;
        }
        const std::size_t sep = row_text.find('>');
        if (sep == std::string::npos) {
            throw std::runtime_error("grid row '" + row_text +
                                     "' is missing the '>' separator");
        }
        GridRow row;
        row.train_shifts = parse_int_list(row_text.substr(0, sep));
        row.test_shifts = parse_int_list(row_text.substr(sep + 1));
        if (row.test_shifts.empty()) {
            row.test_shifts = {0};
        }
        grid.push_back(std::move(row));
    }
    return grid;
}

std::vector<Recording> load_recordings(const std::string& manifest_path,
                                       std::size_t drop_from_end = 0) {
    auto entries = load_manifest(manifest_path);
    if (drop_from_end >= entries.size()) {
        throw std::runtime_error("--holdout " + std::to_string(drop_from_end) +
                                 " leaves no recordings out of " +
                                 std::to_string(entries.size()));
    }
    entries.resize(entries.size() - drop_from_end);
    std::vector<Recording> recordings;
    recordings.reserve(entries.size());
    for (const auto& entry : entries) {
        recordings.push_back(load_recording(entry));
    }
    return recordings;
}

// Block-mean factor mapping the 12,000-bin spectrum onto the model input.
int decimation_for(int input_dim) {
    if (input_dim <= 0 || kFeatureDim % input_dim != 0) {
        throw std::runtime_error("model input dimension " + std::to_string(input_dim) +
                                 " does not divide the " + std::to_string(kFeatureDim) +
                                 "-bin spectrum");
    }
    return kFeatureDim / input_dim;
}

void condition_features(LabeledDataset& dataset, int factor, bool normalize) {
    for (FeatureVector& f : dataset.features) {
        if (factor > 1) {
            f = decimate(f, factor);
        }
        if (normalize) {
            f = normalize_unit_max(f);
        }
    }
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot write " + path);
    }
    out << text;
}

void emit(const std::string& out_path, const std::string& text) {
    if (out_path.empty()) {
        std::cout << text;
    } else {
        write_text(out_path, text);
    }
}

std::string shift_suffix(int s) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "_s%+d", s);
    return buf;
}

// ---------------------------------------------------------------------------
// Option bundles

struct OnsetFlags {
    OnsetConfig config;

    void attach(CLI::App* cmd) {
        cmd->add_option("--onset-window", config.window,
                        "Analysis window length in samples")
            ->capture_default_str();
        cmd->add_option("--onset-hop", config.hop, "Hop between windows in samples")
            ->capture_default_str();
        cmd->add_option("--onset-pre", config.pre,
                        "Frames before a peak in the local-max neighborhood")
            ->capture_default_str();
        cmd->add_option("--onset-post", config.post,
                        "Frames after a peak in the local-max neighborhood")
            ->capture_default_str();
        cmd->add_option("--onset-wait", config.wait,
                        "Minimum frames between accepted peaks")
            ->capture_default_str();
        cmd->add_option("--onset-delta", config.delta_fraction,
                        "Peak threshold as a fraction of the envelope maximum")
            ->capture_default_str();
    }
};

struct TrainFlags {
    std::string dims = "12000,15000,9000,4500,1500,450,100,6";
    double dropout = 0.25;
    int epochs = 25;
    double lr = 0.0002;
    int batch = 32;
    int patience = 5;
    double train_fraction = 0.8;
    std::uint64_t seed = 0;

    void attach(CLI::App* cmd) {
        cmd->add_option("--dims", dims, "Layer sizes, input first, 6 last")
            ->capture_default_str();
        cmd->add_option("--dropout", dropout, "Dropout rate for the early hidden layers")
            ->capture_default_str();
        cmd->add_option("--epochs", epochs, "Maximum training epochs")
            ->capture_default_str();
        cmd->add_option("--lr", lr, "Adam learning rate")->capture_default_str();
        cmd->add_option("--batch", batch, "Mini-batch size")->capture_default_str();
        cmd->add_option("--patience", patience,
                        "Epochs without validation improvement before stopping")
            ->capture_default_str();
        cmd->add_option("--train-fraction", train_fraction,
                        "Share of examples used for training vs validation")
            ->capture_default_str();
        cmd->add_option("--seed", seed, "Seed for init, shuffling, and dropout")
            ->capture_default_str();
    }

    std::vector<int> parse_dims() const {
        const std::vector<int> d = parse_int_list(dims);
        if (d.size() < 2) {
            throw std::runtime_error("--dims needs at least an input and an output size");
        }
        return d;
    }

    TrainConfig config() const {
        TrainConfig c;
        c.epochs = epochs;
        c.learning_rate = lr;
        c.batch_size = batch;
        c.patience = patience;
        c.seed = seed;
        return c;
    }
};

// ---------------------------------------------------------------------------
// transcribe

struct TranscribeOptions {
    std::string input, model, output;
    bool normalize = false;
    OnsetFlags onset;
};

int cmd_transcribe(const TranscribeOptions& opt) {
    const Network net = load_model(opt.model);
    const int factor = decimation_for(net.input_dim());
    const AudioClip clip = load_wav(opt.input);
    const std::vector<double> onsets = detect_onsets(clip, opt.onset.config);

    std::ostringstream out;
    out << "seconds,label\n";
    if (!onsets.empty()) {
        const std::vector<FeatureVector> features = extract_all(clip, onsets);
        char line[64];
        for (std::size_t i = 0; i < onsets.size(); ++i) {
            FeatureVector f = factor > 1 ? decimate(features[i], factor) : features[i];
            if (opt.normalize) {
                f = normalize_unit_max(f);
            }
            const auto [label, probs] = predict(net, f);
            std::snprintf(line, sizeof(line), "%.6f,%s\n", onsets[i], to_string(label));
            out << line;
        }
    }
    emit(opt.output, out.str());
    return 0;
}

// ---------------------------------------------------------------------------
// train

struct TrainOptions {
    std::string manifest, out, history;
    std::string augment_shifts;
    bool redetect = false;
    bool weighted = false;
    bool normalize = false;
    std::size_t balanced = 0;
    std::size_t holdout = 0;
    TrainFlags flags;
};

int cmd_train(const TrainOptions& opt) {
    const std::vector<int> dims = opt.flags.parse_dims();
    const int factor = decimation_for(dims[0]);
    const std::vector<LayerSpec> arch = make_architecture(dims, opt.flags.dropout);

    const std::vector<Recording> recordings = load_recordings(opt.manifest, opt.holdout);

    std::set<int> shift_set = {0};
    for (int s : parse_int_list(opt.augment_shifts)) {
        shift_set.insert(s);
    }
    AugmentConfig augment;
    augment.redetect_onsets = opt.redetect;
    LabeledDataset dataset = build_augmented_dataset(
        recordings, std::vector<int>(shift_set.begin(), shift_set.end()), augment);
    condition_features(dataset, factor, opt.normalize);
    if (opt.balanced > 0) {
        dataset = balance_dataset(dataset, opt.balanced, opt.flags.seed);
    }

    auto [train_set, val_set] =
        split_train_val(dataset, opt.flags.train_fraction, opt.flags.seed);

    TrainConfig config = opt.flags.config();
    if (opt.weighted) {
        const auto counts = train_set.class_counts();
        config.class_weights = compute_class_weights(
            std::vector<std::size_t>(counts.begin(), counts.end()));
    }

    const auto [net, history] = train<float>(train_set, val_set, arch, config);

    const std::string history_path =
        opt.history.empty() ? opt.out + ".history.csv" : opt.history;
    save_model(opt.out, net);
    save_history(history_path, history);

    char line[128];
    std::snprintf(line, sizeof(line), "examples: %zu train / %zu val\n",
                  train_set.size(), val_set.size());
    std::cout << line;
    std::snprintf(line, sizeof(line), "best epoch: %d\n", history.best_epoch + 1);
    std::cout << line;
    std::snprintf(line, sizeof(line), "validation accuracy: %.4f\n",
                  history.val_acc[static_cast<std::size_t>(history.best_epoch)]);
    std::cout << line;
    std::cout << "model: " << opt.out << "\n";
    std::cout << "history: " << history_path << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// augment

struct AugmentOptions {
    std::string input, annotations, shifts, out_dir;
};

int cmd_augment(const AugmentOptions& opt) {
    const std::vector<int> shifts = parse_int_list(opt.shifts);
    if (shifts.empty()) {
        throw std::runtime_error("--shifts is empty");
    }
    const AudioClip clip = load_wav(opt.input);
    const std::vector<Annotation> annotations = load_annotations(opt.annotations);

    const std::filesystem::path input_path(opt.input);
    const std::filesystem::path dir =
        opt.out_dir.empty() ? input_path.parent_path() : std::filesystem::path(opt.out_dir);
    if (!opt.out_dir.empty()) {
        std::filesystem::create_directories(dir);
    }
    const std::string stem = input_path.stem().string();

    for (int s : shifts) {
        const AudioClip shifted = pitch_shift(clip, s);
        const std::vector<Annotation> scaled = scale_annotations(annotations, s);
        const std::string wav_path = (dir / (stem + shift_suffix(s) + ".wav")).string();
        const std::string ann_path = (dir / (stem + shift_suffix(s) + ".csv")).string();
        save_wav(wav_path, shifted);
        save_annotations(ann_path, scaled);
        std::cout << wav_path << "\n" << ann_path << "\n";
    }
    return 0;
}

// ---------------------------------------------------------------------------
// eval-onsets

struct EvalOnsetsOptions {
    std::string input, truth, output;
    double tolerance = 0.015;
    OnsetFlags onset;
};

int cmd_eval_onsets(const EvalOnsetsOptions& opt) {
    const AudioClip clip = load_wav(opt.input);
    const std::vector<double> detected = detect_onsets(clip, opt.onset.config);

    std::ostringstream csv;
    csv << "seconds\n";
    char line[32];
    for (double t : detected) {
        std::snprintf(line, sizeof(line), "%.6f\n", t);
        csv << line;
    }
    emit(opt.output, csv.str());

    if (!opt.truth.empty()) {
        const std::vector<Annotation> annotations =
            merge_composites(load_annotations(opt.truth));
        std::vector<double> truth;
        truth.reserve(annotations.size());
        for (const auto& a : annotations) {
            truth.push_back(a.onset);
        }
        const OnsetMatchReport r = match_onsets(detected, truth, opt.tolerance);
        char report[160];
        std::snprintf(report, sizeof(report),
                      "# matched=%zu missed=%zu false_positives=%zu accuracy=%.4f "
                      "mean_abs_offset_ms=%.3f\n",
                      r.matched, r.missed, r.false_positives, r.accuracy,
                      r.mean_abs_offset * 1000.0);
        std::cout << report;
    }
    return 0;
}

// ---------------------------------------------------------------------------
// synth

struct SynthOptions {
    std::string out_wav, out_annotations, out_recipes, recipes;
    SynthCorpusSpec spec;
};

int cmd_synth(const SynthOptions& opt) {
    std::vector<StrokeRecipe> recipes;
    if (opt.recipes.empty()) {
        recipes = default_recipes();
    } else {
        std::ifstream in(opt.recipes, std::ios::binary);
        if (!in) {
            throw std::runtime_error("cannot read " + opt.recipes);
        }
        std::ostringstream text;
        text << in.rdbuf();
        recipes = recipes_from_json(text.str());
    }

    const auto [clip, annotations] = generate_corpus(opt.spec, recipes);
    save_wav(opt.out_wav, clip);
    save_annotations(opt.out_annotations, annotations);

    const std::string recipes_path =
        opt.out_recipes.empty()
            ? std::filesystem::path(opt.out_wav).replace_extension(".recipes.json").string()
            : opt.out_recipes;
    write_text(recipes_path, recipes_to_json(recipes));

    char line[128];
    std::snprintf(line, sizeof(line), "strokes: %zu (%d per class)\n", annotations.size(),
                  opt.spec.strokes_per_class);
    std::cout << line;
    std::snprintf(line, sizeof(line), "duration: %.2f s\n", clip.duration());
    std::cout << line;
    std::cout << "audio: " << opt.out_wav << "\n";
    std::cout << "annotations: " << opt.out_annotations << "\n";
    std::cout << "recipes: " << recipes_path << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// experiment

struct ExperimentOptions {
    std::string manifest, grid, output;
    std::size_t heldout = 1;
    TrainFlags flags{.dims = "1200,256,64,6"};
};

int cmd_experiment(const ExperimentOptions& opt, bool grid_given) {
    const std::vector<GridRow> grid = grid_given ? parse_grid(opt.grid) : default_grid();

    GridConfig config;
    config.train = opt.flags.config();
    config.layer_dims = opt.flags.parse_dims();
    config.decimate_factor = decimation_for(config.layer_dims[0]);
    config.train_fraction = opt.flags.train_fraction;
    config.heldout_recordings = opt.heldout;

    const std::vector<Recording> recordings = load_recordings(opt.manifest);
    const std::vector<GridRowResult> results =
        run_invariance_grid(recordings, grid, config);
    emit(opt.output, grid_to_csv(results));
    return 0;
}

// ---------------------------------------------------------------------------
// baseline

struct BaselineOptions {
    std::string manifest, mode = "template", save;
    double train_fraction = 0.8;
    std::uint64_t seed = 0;
    int svm_epochs = 20;
    double svm_lr = 0.0;
    double svm_reg = 1e-4;
};

int cmd_baseline(const BaselineOptions& opt) {
    const std::vector<Recording> recordings = load_recordings(opt.manifest);
    const LabeledDataset dataset = build_augmented_dataset(recordings, {0});
    const auto [train_set, val_set] =
        split_train_val(dataset, opt.train_fraction, opt.seed);
    if (val_set.size() == 0) {
        throw std::runtime_error("validation split is empty; lower --train-fraction");
    }

    std::vector<StrokeLabel> preds;
    preds.reserve(val_set.size());
    if (opt.mode == "template") {
        const TemplateSet templates =
            compute_templates(train_set.features, train_set.labels);
        for (const FeatureVector& f : val_set.features) {
            preds.push_back(template_classify(templates, f));
        }
        if (!opt.save.empty()) {
            save_templates(opt.save, templates);
        }
    } else {
        SvmConfig config;
        config.epochs = opt.svm_epochs;
        config.lr = opt.svm_lr;
        config.reg = opt.svm_reg;
        config.seed = opt.seed;
        const SvmModel model = svm_train(train_set, config);
        for (const FeatureVector& f : val_set.features) {
            preds.push_back(svm_predict(model, f));
        }
        if (!opt.save.empty()) {
            save_svm(opt.save, model);
        }
    }

    const ClassMetrics m = metrics(confusion(preds, val_set.labels));
    char line[96];
    std::snprintf(line, sizeof(line), "%s baseline on %zu held-back examples\n",
                  opt.mode.c_str(), val_set.size());
    std::cout << line << metrics_to_text(m);
    if (!opt.save.empty()) {
        std::cout << "saved: " << opt.save << "\n";
    }
    return 0;
}

}  // namespace

// ---------------------------------------------------------------------------

int main(int argc, char** argv) {
    CLI::App app{"Mridangam stroke transcription"};
    app.require_subcommand(1);
    app.set_config("--config", "", "Read options from a key=value file");
    app.set_version_flag("--version", "1.0.0");

    TranscribeOptions transcribe;
    CLI::App* transcribe_cmd = app.add_subcommand(
        "transcribe", "Label every stroke onset in a recording");
    transcribe_cmd->add_option("--input,-i", transcribe.input, "Input WAV file")
        ->required();
    transcribe_cmd->add_option("--model,-m", transcribe.model, "Trained model file")
        ->required();
    transcribe_cmd->add_option("--output,-o", transcribe.output,
                               "Output CSV (default: stdout)");
    transcribe_cmd->add_flag("--normalize", transcribe.normalize,
                             "Scale each feature vector to unit maximum "
                             "(must match how the model was trained)");
    transcribe.onset.attach(transcribe_cmd);

    TrainOptions train_opt;
    CLI::App* train_cmd = app.add_subcommand("train", "Train a stroke classifier");
    train_cmd->add_option("--manifest", train_opt.manifest,
                          "CSV of wav,annotation path pairs")
        ->required();
    train_cmd->add_option("--out,-o", train_opt.out, "Model file to write")->required();
    train_cmd->add_option("--history", train_opt.history,
                          "Training history CSV (default: <out>.history.csv)");
    train_cmd->add_option("--augment", train_opt.augment_shifts,
                          "Comma-separated semitone shifts added to the training data");
    train_cmd->add_flag("--redetect", train_opt.redetect,
                        "Re-detect onsets on shifted audio instead of scaling "
                        "annotation times");
    train_cmd->add_flag("--weighted", train_opt.weighted,
                        "Weight the loss by inverse class frequency");
    train_cmd->add_flag("--normalize", train_opt.normalize,
                        "Scale each feature vector to unit maximum");
    train_cmd->add_option("--balanced", train_opt.balanced,
                          "Subsample to this many examples per class (0 = off)")
        ->capture_default_str();
    train_cmd->add_option("--holdout", train_opt.holdout,
                          "Recordings at the end of the manifest to exclude")
        ->capture_default_str();
    train_opt.flags.attach(train_cmd);

    AugmentOptions augment;
    CLI::App* augment_cmd = app.add_subcommand(
        "augment", "Write pitch-shifted copies of a recording");
    augment_cmd->add_option("--input,-i", augment.input, "Input WAV file")->required();
    augment_cmd->add_option("--annotations,-a", augment.annotations,
                            "Annotation CSV for the input")
        ->required();
    augment_cmd->add_option("--shifts", augment.shifts,
                            "Comma-separated semitone shifts, e.g. -2,-1,1,2")
        ->required();
    augment_cmd->add_option("--out-dir", augment.out_dir,
                            "Output directory (default: alongside the input)");

    EvalOnsetsOptions eval_onsets;
    CLI::App* eval_cmd = app.add_subcommand(
        "eval-onsets", "Detect onsets and optionally score them against truth");
    eval_cmd->add_option("--input,-i", eval_onsets.input, "Input WAV file")->required();
    eval_cmd->add_option("--truth,-t", eval_onsets.truth, "Truth annotation CSV");
    eval_cmd->add_option("--output,-o", eval_onsets.output,
                         "Detected-onset CSV (default: stdout)");
    eval_cmd->add_option("--tolerance", eval_onsets.tolerance,
                         "Match tolerance in seconds")
        ->capture_default_str();
    eval_onsets.onset.attach(eval_cmd);

    SynthOptions synth;
    CLI::App* synth_cmd = app.add_subcommand(
        "synth", "Generate a synthetic annotated corpus");
    synth_cmd->add_option("--out-wav", synth.out_wav, "Corpus WAV to write")->required();
    synth_cmd->add_option("--out-annotations", synth.out_annotations,
                          "Annotation CSV to write")
        ->required();
    synth_cmd->add_option("--out-recipes", synth.out_recipes,
                          "Recipe JSON to write (default: <out-wav>.recipes.json)");
    synth_cmd->add_option("--recipes", synth.recipes,
                          "Recipe JSON to use instead of the built-in set");
    synth_cmd->add_option("--tonic", synth.spec.tonic_hz, "Drum tonic in Hz")
        ->capture_default_str();
    synth_cmd->add_option("--per-class", synth.spec.strokes_per_class,
                          "Strokes generated per class")
        ->capture_default_str();
    synth_cmd->add_option("--min-gap", synth.spec.min_gap,
                          "Minimum onset spacing in seconds")
        ->capture_default_str();
    synth_cmd->add_option("--max-gap", synth.spec.max_gap,
                          "Maximum onset spacing in seconds")
        ->capture_default_str();
    synth_cmd->add_option("--seed", synth.spec.seed, "Corpus random seed")
        ->capture_default_str();

    ExperimentOptions experiment;
    CLI::App* experiment_cmd = app.add_subcommand(
        "experiment", "Run the augmentation-vs-shift accuracy grid");
    experiment_cmd
        ->add_option("--manifest", experiment.manifest, "CSV of wav,annotation pairs")
        ->required();
    CLI::Option* grid_option = experiment_cmd->add_option(
        "--grid", experiment.grid,
        "Rows as TRAIN>TEST;TRAIN>TEST with comma-separated semitones "
        "(default: the standard five-row sweep)");
    experiment_cmd->add_option("--output,-o", experiment.output,
                               "Report CSV (default: stdout)");
    experiment_cmd
        ->add_option("--holdout", experiment.heldout,
                     "Recordings at the end of the manifest scored separately")
        ->capture_default_str();
    experiment.flags.attach(experiment_cmd);

    BaselineOptions baseline;
    CLI::App* baseline_cmd = app.add_subcommand(
        "baseline", "Train and score a non-neural reference classifier");
    baseline_cmd->add_option("--manifest", baseline.manifest,
                             "CSV of wav,annotation pairs")
        ->required();
    baseline_cmd->add_option("--mode", baseline.mode, "Classifier kind")
        ->check(CLI::IsMember({"template", "svm"}))
        ->capture_default_str();
    baseline_cmd->add_option("--save", baseline.save, "Write the fitted model here");
    baseline_cmd->add_option("--train-fraction", baseline.train_fraction,
                             "Share of examples used for fitting")
        ->capture_default_str();
    baseline_cmd->add_option("--seed", baseline.seed, "Split/training seed")
        ->capture_default_str();
    baseline_cmd->add_option("--svm-epochs", baseline.svm_epochs, "Scorer epochs")
        ->capture_default_str();
    baseline_cmd->add_option("--svm-lr", baseline.svm_lr,
                             "Scorer step size (0 = automatic)")
        ->capture_default_str();
    baseline_cmd->add_option("--svm-reg", baseline.svm_reg, "Scorer L2 coefficient")
        ->capture_default_str();

    CLI11_PARSE(app, argc, argv);

    try {
        if (app.got_subcommand(transcribe_cmd)) {
            return cmd_transcribe(transcribe);
        }
        if (app.got_subcommand(train_cmd)) {
            return cmd_train(train_opt);
        }
        if (app.got_subcommand(augment_cmd)) {
            return cmd_augment(augment);
        }
        if (app.got_subcommand(eval_cmd)) {
            return cmd_eval_onsets(eval_onsets);
        }
        if (app.got_subcommand(synth_cmd)) {
            return cmd_synth(synth);
        }
        if (app.got_subcommand(experiment_cmd)) {
            return cmd_experiment(experiment, grid_option->count() > 0);
        }
        if (app.got_subcommand(baseline_cmd)) {
            return cmd_baseline(baseline);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
