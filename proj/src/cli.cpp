/********************************************************************************
* Copyright 2026 The anpr Authors. All Rights Reserved.
*
* Licensed under the Apache License, Version 2.0 (the "License");
* you may not use this file except in compliance with the License.
* You may obtain a copy of the License at
*
*    http://www.apache.org/licenses/LICENSE-2.0
*
* Unless required by applicable law or agreed to in writing, software
* distributed under the License is distributed on an "AS IS" BASIS,
* WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
* See the License for the specific language governing permissions and
* limitations under the License.
********************************************************************************/


#include "anpr/cli.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <exception>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "anpr/charnet.hpp"
#include "anpr/config.hpp"
#include "anpr/darknet.hpp"
#include "anpr/imageio.hpp"
#include "anpr/imgproc.hpp"
#include "anpr/pipeline.hpp"
#include "anpr/synthgen.hpp"

namespace anpr::cli {

namespace fs = std::filesystem;

const std::vector<std::pair<std::string, std::string>>& tool_defaults()
{
    static const std::vector<std::pair<std::string, std::string>> d = {
        {"per_class", std::to_string(kDefaultPerClass)},
        {"seed", "1"},
        {"glyphs", "builtin"},
        {"epochs", "15"},
        {"lr", "0.01"},
        {"momentum", "0.9"},
        {"batch_size", "32"},
        {"workers", "0"},
    };
    return d;
}

namespace {

const std::map<std::string, std::string, std::less<>> kToolHelp = {
    {"per_class", "samples per character class"},
    {"seed", "random seed"},
    {"glyphs", "glyph override directory, or builtin"},
    {"epochs", "training epochs"},
    {"lr", "learning rate"},
    {"momentum", "SGD momentum"},
    {"batch_size", "training mini-batch size"},
    {"workers", "batch worker threads (0 = one per core)"},
};

std::string dashed(std::string key)
{
    std::replace(key.begin(), key.end(), '_', '-');
    return "--" + key;
}

bool is_known_key(std::string_view key)
{
    const auto& pk = pipeline_keys();
    if (std::find(pk.begin(), pk.end(), key) != pk.end()) return true;
    return kToolHelp.contains(key);
}

// Options that mirror settings keys. Flags override the config file, which
// overrides the defaults.
class Layers
{
public:
    void add(CLI::App* app, const std::string& key, const std::string& help)
    {
        auto& slot = values_[key];
        options_.emplace_back(key, app->add_option(dashed(key), slot, help));
    }

    void add_pipeline(CLI::App* app)
    {
        for (const auto& key : pipeline_keys()) add(app, key, std::string(describe_key(key)));
        add_config(app);
    }

    void add_config(CLI::App* app)
    {
        app->add_option("--config", config_path_, "settings file (key = value)");
    }

    void add_tool(CLI::App* app, std::initializer_list<const char*> keys)
    {
        for (const char* k : keys) add(app, k, kToolHelp.at(k));
    }

    Settings resolve() const
    {
        Settings s;
        for (const auto& [k, v] : tool_defaults()) s[k] = v;
        if (!config_path_.empty()) {
            const Settings file = parse_settings(read_file(config_path_));
            for (const auto& [k, v] : file) {
                ANPR_CHECK(is_known_key(k), config_path_ + ": unknown setting '" + k + "'");
                s[k] = v;
            }
        }
        for (const auto& [k, opt] : options_) {
            if (opt->count() > 0) s[k] = values_.at(k);
        }
        return s;
    }

private:
    std::map<std::string, std::string> values_;
    std::vector<std::pair<std::string, CLI::Option*>> options_;
    std::string config_path_;
};

template <typename T>
T number(const Settings& s, const std::string& key)
{
    const std::string& v = s.at(key);
    T out{};
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    ANPR_CHECK(ec == std::errc{} && ptr == v.data() + v.size(),
               "setting '" + key + "': expected a number, got '" + v + "'");
    return out;
}

GlyphSet glyphs_from(const Settings& s)
{
    const std::string& g = s.at("glyphs");
    return g == "builtin" ? builtin_glyphs() : load_glyph_overrides(builtin_glyphs(), g);
}

PipelineConfig pipeline_from(const Settings& s)
{
    return apply_settings(PipelineConfig{}, s);
}

std::string format_probs(const PlateResult& r)
{
    std::ostringstream o;
    char buf[64];
    for (std::size_t i = 0; i < r.probs.size(); ++i) {
        const auto& p = r.probs[i];
        std::snprintf(buf, sizeof buf, "%c %.4f", r.text[i], p[class_index(r.text[i])]);
        o << buf;
        // Runner-up from the same ambiguity group, when it is a real contender.
        std::array<double, kNumClasses> rest = p;
        rest[class_index(r.text[i])] = -1;
        const int second = argmax(rest);
        for (auto grp : kAmbiguityGroups) {
            if (grp.find(r.text[i]) != std::string_view::npos && grp.find(kAlphabet[second]) != std::string_view::npos &&
                rest[second] >= 0.05) {
                std::snprintf(buf, sizeof buf, "  (ambiguous: %c %.4f)", kAlphabet[second], rest[second]);
                o << buf;
            }
        }
        o << "\n";
    }
    return o.str();
}

bool is_image_file(const fs::path& p)
{
    std::string ext = p.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    return ext == ".png" || ext == ".jpg" || ext == ".jpeg" || ext == ".pgm" || ext == ".ppm" || ext == ".pnm";
}

struct FrameResult
{
    std::vector<PlateResult> plates;
    std::vector<GrayImage> crops;
    std::string error;
};

FrameResult process_frame(const fs::path& path, const darknet::Network* net, const PipelineConfig& cfg,
                          const CharModel& model)
{
    FrameResult fr;
    try {
        const RgbImage img = read_image(path);
        const GrayImage gray = to_grayscale(img);
        fr.plates = process_image(img, net, cfg, model, path.string());
        for (const auto& p : fr.plates) fr.crops.push_back(crop_region(gray, p.region));
    } catch (const std::exception& e) {
        fr.error = e.what();
    }
    return fr;
}

// CSV with a header row; returns rows as column-name -> value maps.
std::vector<std::map<std::string, std::string>> read_csv(const fs::path& path)
{
    std::istringstream in(read_file(path));
    std::string line;
    ANPR_CHECK(std::getline(in, line), path.string() + ": empty file");
    auto split = [](const std::string& l) {
        std::vector<std::string> out;
        std::string cell;
        std::istringstream ls(l);
        while (std::getline(ls, cell, ',')) {
            if (!cell.empty() && cell.back() == '\r') cell.pop_back();
            out.push_back(cell);
        }
        if (!l.empty() && l.back() == ',') out.emplace_back();
        return out;
    };
    const auto head = split(line);
    std::vector<std::map<std::string, std::string>> rows;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line == "\r") continue;
        const auto cells = split(line);
        ANPR_CHECK(cells.size() == head.size(),
                   path.string() + " line " + std::to_string(lineno) + ": expected " + std::to_string(head.size()) +
                       " columns");
        std::map<std::string, std::string> row;
        for (std::size_t i = 0; i < head.size(); ++i) row[head[i]] = cells[i];
        rows.push_back(std::move(row));
    }
    return rows;
}

std::string source_key(const std::string& s)
{
    return fs::path(s).filename().string();
}

AccuracyReport evaluate_files(const fs::path& pred_csv, const fs::path& truth_csv)
{
    const auto preds = read_csv(pred_csv);
    const auto truths = read_csv(truth_csv);
    std::map<std::string, std::pair<std::string, double>> by_source;
    for (const auto& row : preds) {
        ANPR_CHECK(row.contains("source") && row.contains("text"), pred_csv.string() + ": needs source and text columns");
        const auto key = source_key(row.at("source"));
        if (by_source.contains(key)) continue;   // first plate of a frame = highest score
        double seconds = 0;
        if (auto it = row.find("total_ms"); it != row.end() && !it->second.empty()) seconds = std::stod(it->second) / 1000;
        by_source[key] = {row.at("text"), seconds};
    }
    std::vector<EvalPair> pairs;
    for (const auto& row : truths) {
        const std::string col = row.contains("truth") ? "truth" : "text";
        ANPR_CHECK(row.contains("source") && row.contains(col), truth_csv.string() + ": needs source and truth columns");
        EvalPair p{row.at("source"), "", row.at(col), 0};
        if (auto it = by_source.find(source_key(p.source)); it != by_source.end()) {
            p.predicted = it->second.first;
            p.seconds = it->second.second;
        }
        pairs.push_back(std::move(p));
    }
    return evaluate_batch(pairs);
}

std::string dump_settings(const Settings& s)
{
    std::string out = "# anpr configuration\n";
    const PipelineConfig cfg = pipeline_from(s);
    const Settings pipe = to_settings(cfg);
    for (const auto& key : pipeline_keys()) {
        out += "\n# " + std::string(describe_key(key)) + "\n" + key + " = " + pipe.at(key) + "\n";
    }
    for (const auto& [key, def] : tool_defaults()) {
        out += "\n# " + kToolHelp.at(key) + "\n" + key + " = " + s.at(key) + "\n";
    }
    return out;
}

}   // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Automatic number plate recognition toolkit", "anpr"};
    app.require_subcommand(1);
    app.failure_message(CLI::FailureMessage::help);

    // gen-dataset
    auto* gen = app.add_subcommand("gen-dataset", "render an augmented character dataset");
    std::string gen_out;
    gen->add_option("--out", gen_out, "output directory")->required();
    Layers gen_l;
    gen_l.add_tool(gen, {"per_class", "seed", "glyphs"});
    gen_l.add_config(gen);

    // train
    auto* tr = app.add_subcommand("train", "train the character classifier");
    std::string tr_data, tr_out, tr_log;
    tr->add_option("--data", tr_data, "dataset directory written by gen-dataset")->required();
    tr->add_option("--out", tr_out, "model file to write")->required();
    tr->add_option("--log", tr_log, "also write the epoch log CSV here");
    Layers tr_l;
    tr_l.add_tool(tr, {"epochs", "lr", "momentum", "batch_size", "seed"});
    tr_l.add(tr, "char_side", std::string(describe_key("char_side")));
    tr_l.add_config(tr);

    // ocr
    auto* ocr = app.add_subcommand("ocr", "read one plate crop (no detector)");
    std::string ocr_model, ocr_image;
    ocr->add_option("--model", ocr_model, "character model")->required();
    ocr->add_option("--image", ocr_image, "plate image")->required();
    Layers ocr_l;
    ocr_l.add_pipeline(ocr);

    // detect
    auto* det = app.add_subcommand("detect", "locate and read plates in one image");
    std::string det_model, det_cfg, det_weights, det_image, det_out;
    det->add_option("--model", det_model, "character model")->required();
    det->add_option("--cfg", det_cfg, "darknet network description")->required();
    det->add_option("--weights", det_weights, "darknet weights")->required();
    det->add_option("--image", det_image, "scene image")->required();
    det->add_option("--out", det_out, "directory for plate crops and results.csv")->required();
    Layers det_l;
    det_l.add_pipeline(det);

    // batch
    auto* bat = app.add_subcommand("batch", "read every frame in a directory");
    std::string bat_model, bat_cfg, bat_weights, bat_input, bat_out;
    bat->add_option("--model", bat_model, "character model")->required();
    bat->add_option("--input", bat_input, "directory of frames")->required();
    bat->add_option("--out", bat_out, "directory for plate crops and results.csv")->required();
    auto* bat_cfg_opt = bat->add_option("--cfg", bat_cfg, "darknet network description (omit for bypass)");
    auto* bat_w_opt = bat->add_option("--weights", bat_weights, "darknet weights (omit for bypass)");
    bat_cfg_opt->needs(bat_w_opt);
    bat_w_opt->needs(bat_cfg_opt);
    Layers bat_l;
    bat_l.add_tool(bat, {"workers"});
    bat_l.add_pipeline(bat);

    // eval
    auto* ev = app.add_subcommand("eval", "score predictions against ground truth");
    std::string ev_pred, ev_truth, ev_dir, ev_csv;
    auto* pred_opt = ev->add_option("--pred", ev_pred, "predictions CSV (source,text[,total_ms])");
    auto* truth_opt = ev->add_option("--truth", ev_truth, "ground truth CSV (source,truth)");
    auto* dir_opt = ev->add_option("--dir", ev_dir, "directory holding results.csv and truth.csv");
    pred_opt->needs(truth_opt)->excludes(dir_opt);
    truth_opt->needs(pred_opt)->excludes(dir_opt);
    ev->add_option("--csv", ev_csv, "also write the report as CSV");

    // config
    auto* conf = app.add_subcommand("config", "print the effective configuration");
    bool dump = false;
    conf->add_flag("--dump", dump, "print every setting with its description");
    Layers conf_l;
    conf_l.add_tool(conf, {"per_class", "seed", "glyphs", "epochs", "lr", "momentum", "batch_size", "workers"});
    conf_l.add_pipeline(conf);

    std::vector<const char*> argv = {"anpr"};
    for (const auto& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "anpr: " << e.what() << "\n";
        const auto* sub = app.get_subcommands().empty() ? &app : app.get_subcommands().front();
        err << "usage: see 'anpr " << (sub == &app ? "" : sub->get_name() + " ") << "--help'\n";
        return kExitUsage;
    }

    try {
        if (gen->parsed()) {
            const Settings s = gen_l.resolve();
            const auto n = write_dataset(gen_out, glyphs_from(s), number<int>(s, "per_class"), AugmentRanges{},
                                         number<std::uint64_t>(s, "seed"));
            out << "wrote " << n << " samples to " << gen_out << "\n";
        } else if (tr->parsed()) {
            const Settings s = tr_l.resolve();
            const PipelineConfig cfg = pipeline_from(s);
            TrainConfig tc;
            tc.epochs = number<int>(s, "epochs");
            tc.learning_rate = number<double>(s, "lr");
            tc.momentum = number<double>(s, "momentum");
            tc.batch_size = number<int>(s, "batch_size");
            tc.seed = number<std::uint64_t>(s, "seed");
            const auto data = read_dataset(tr_data);
            Architecture arch;
            arch.input_side = cfg.char_side;
            const auto result = train(CharModel(arch), data, tc);
            write_model(tr_out, result.model);
            const std::string log = format_training_log(result.log);
            if (!tr_log.empty()) write_file(tr_log, log);
            out << log;
        } else if (ocr->parsed()) {
            const PipelineConfig cfg = pipeline_from(ocr_l.resolve());
            const CharModel model = read_model(ocr_model);
            const PlateResult r = recognize_plate(read_image(ocr_image), cfg, model);
            out << (r.unread ? "(unread)" : r.text) << "\n" << format_probs(r);
        } else if (det->parsed() || bat->parsed()) {
            const bool is_batch = bat->parsed();
            const Settings s = (is_batch ? bat_l : det_l).resolve();
            const PipelineConfig cfg = pipeline_from(s);
            const CharModel model = read_model(is_batch ? bat_model : det_model);
            std::optional<darknet::Network> net;
            const std::string& cfg_path = is_batch ? bat_cfg : det_cfg;
            if (!cfg_path.empty()) net = darknet::load_network(cfg_path, is_batch ? bat_weights : det_weights);
            const fs::path out_dir = is_batch ? bat_out : det_out;
            fs::create_directories(out_dir);

            std::vector<fs::path> frames;
            if (is_batch) {
                ANPR_CHECK(fs::is_directory(bat_input), "input directory not found: " + bat_input);
                for (const auto& e : fs::directory_iterator(bat_input)) {
                    if (e.is_regular_file() && is_image_file(e.path())) frames.push_back(e.path());
                }
                std::sort(frames.begin(), frames.end());
            } else {
                frames.push_back(det_image);
            }

            int workers = is_batch ? number<int>(s, "workers") : 1;
            ANPR_CHECK(workers >= 0, "workers must be non-negative");
            if (workers == 0) workers = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
            workers = std::min<int>(workers, static_cast<int>(std::max<std::size_t>(1, frames.size())));

            std::vector<FrameResult> results(frames.size());
            std::atomic<std::size_t> next{0};
            auto work = [&] {
                for (std::size_t i; (i = next++) < frames.size();) {
                    results[i] = process_frame(frames[i], net ? &*net : nullptr, cfg, model);
                }
            };
            std::vector<std::thread> pool;
            for (int w = 1; w < workers; ++w) pool.emplace_back(work);
            work();
            for (auto& t : pool) t.join();

            // Persist in frame order so file names do not depend on scheduling.
            int failures = 0;
            for (std::size_t i = 0; i < frames.size(); ++i) {
                const auto& fr = results[i];
                if (!fr.error.empty()) {
                    err << "anpr: " << frames[i].string() << ": " << fr.error << "\n";
                    ++failures;
                    continue;
                }
                for (std::size_t k = 0; k < fr.plates.size(); ++k) {
                    const auto path = persist_result(fr.plates[k], fr.crops[k], out_dir);
                    out << frames[i].filename().string() << " -> " << path.filename().string() << " "
                        << (fr.plates[k].unread ? "(unread)" : fr.plates[k].text) << "\n";
                }
                if (fr.plates.empty()) out << frames[i].filename().string() << " -> no plate\n";
            }
            if (failures > 0 && (!is_batch || failures == static_cast<int>(frames.size()))) return kExitFailure;
        } else if (ev->parsed()) {
            ANPR_CHECK(!ev_pred.empty() || !ev_dir.empty(), "eval needs --pred/--truth or --dir");
            const fs::path pred = ev_dir.empty() ? fs::path(ev_pred) : fs::path(ev_dir) / "results.csv";
            const fs::path truth = ev_dir.empty() ? fs::path(ev_truth) : fs::path(ev_dir) / "truth.csv";
            const AccuracyReport rep = evaluate_files(pred, truth);
            out << format_report(rep);
            const auto amb = count_ambiguities(rep);
            for (std::size_t g = 0; g < kAmbiguityGroups.size(); ++g) {
                std::string name;
                for (char c : kAmbiguityGroups[g]) name += name.empty() ? std::string(1, c) : std::string("/") + c;
                out << "Confusions within " << name << ": " << amb[g] << "\n";
            }
            if (!ev_csv.empty()) write_file(ev_csv, format_report_csv(rep));
        } else if (conf->parsed()) {
            if (!dump) {
                err << "anpr: config: nothing to do (use --dump)\n";
                return kExitUsage;
            }
            out << dump_settings(conf_l.resolve());
        }
    } catch (const std::exception& e) {
        err << "anpr: " << e.what() << "\n";
        return kExitFailure;
    }
    return kExitOk;
}

int main(int argc, char** argv)
{
    std::vector<std::string> args(argv + 1, argv + argc);
    return run(args, std::cout, std::cerr);
}

}   // anpr::cli
