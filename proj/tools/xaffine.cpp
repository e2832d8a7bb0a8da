#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "xaffine/eval.hpp"
#include "xaffine/image_io.hpp"
#include "xaffine/pipeline.hpp"

namespace fs = std::filesystem;
using namespace xaffine;

namespace {

struct GlobalOptions {
    std::string config_path;
    std::string out_dir = ".";
    std::optional<uint64_t> seed;
    bool viz = false;
};

double parse_threshold(const std::string& s) {
    if (s == "sqrt3") return std::sqrt(3.0);
    if (s == "sqrt8") return std::sqrt(8.0);
    return std::stod(s);
}

void apply_config_file(const std::string& path, PipelineConfig& cfg, double& th) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        const auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        auto trim = [](std::string s) {
            const auto b = s.find_first_not_of(" \t\r");
            if (b == std::string::npos) return std::string();
            const auto e = s.find_last_not_of(" \t\r");
            return s.substr(b, e - b + 1);
        };
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) continue;
        try {
            if (key == "a") cfg.grid.a = std::stod(value);
            else if (key == "n") cfg.grid.n = std::stoi(value);
            else if (key == "b_deg") cfg.grid.b_deg = std::stod(value);
            else if (key == "delta_s") cfg.grid.delta_s = std::stod(value);
            else if (key == "max_points_coarse") cfg.max_points_coarse = std::stoi(value);
            else if (key == "max_points_fine") cfg.max_points_fine = std::stoi(value);
            else if (key == "ratio") cfg.ratio = std::stod(value);
            else if (key == "lanczos_a") cfg.lanczos_a = std::stoi(value);
            else if (key == "ransac_threshold") cfg.ransac.threshold = std::stod(value);
            else if (key == "ransac_max_iters") cfg.ransac.max_iters = std::stoi(value);
            else if (key == "ransac_confidence") cfg.ransac.confidence = std::stod(value);
            else if (key == "seed") cfg.ransac.seed = std::stoull(value);
            else if (key == "th") th = parse_threshold(value);
            else if (key == "final_ransac_filter")
                cfg.final_ransac_filter = (value == "1" || value == "true" || value == "on");
            else
                throw std::runtime_error("unknown key '" + key + "'");
        } catch (const std::exception& e) {
            throw std::runtime_error(path + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
}

void draw_line(RgbImage& img, int x0, int y0, int x1, int y1, uint8_t r, uint8_t g,
               uint8_t b) {
    const int dx = std::abs(x1 - x0), dy = -std::abs(y1 - y0);
    const int sx = x0 < x1 ? 1 : -1, sy = y0 < y1 ? 1 : -1;
    int err = dx + dy;
    while (true) {
        img.set(x0, y0, r, g, b);
        if (x0 == x1 && y0 == y1) break;
        const int e2 = 2 * err;
        if (e2 >= dy) {
            err += dy;
            x0 += sx;
        }
        if (e2 <= dx) {
            err += dx;
            y0 += sy;
        }
    }
}

void write_viz(const GrayImage& img1, const GrayImage& img2, const MatchResult& r,
               const std::string& path) {
    RgbImage canvas(img1.width + img2.width, std::max(img1.height, img2.height));
    auto blit = [&canvas](const GrayImage& img, int off_x) {
        for (int y = 0; y < img.height; ++y)
            for (int x = 0; x < img.width; ++x) {
                const auto v = static_cast<uint8_t>(
                    std::clamp(static_cast<int>(std::lround(img.at(x, y))), 0, 255));
                canvas.set(x + off_x, y, v, v, v);
            }
    };
    blit(img1, 0);
    blit(img2, img1.width);
    std::vector<bool> inlier(r.matches.size(), false);
    for (int i : r.inliers) inlier[i] = true;
    for (size_t i = 0; i < r.matches.size(); ++i) {
        const auto& m = r.matches[i];
        const int x0 = static_cast<int>(std::lround(m.x1));
        const int y0 = static_cast<int>(std::lround(m.y1));
        const int x1 = static_cast<int>(std::lround(m.x2)) + img1.width;
        const int y1 = static_cast<int>(std::lround(m.y2));
        if (inlier[i])
            draw_line(canvas, x0, y0, x1, y1, 0, 200, 0);
        else
            draw_line(canvas, x0, y0, x1, y1, 220, 0, 0);
    }
    save_png_rgb(canvas, path);
}

int cmd_match(const GlobalOptions& opts, const PipelineConfig& cfg,
              const std::string& path1, const std::string& path2) {
    GrayImage img1, img2;
    try {
        img1 = load_image(path1);
        img2 = load_image(path2);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    MatchResult result;
    try {
        result = match_images(img1, img2, cfg);
    } catch (const std::exception& e) {
        std::cerr << "match failed: " << e.what() << "\n";
        return 1;
    }
    fs::create_directories(opts.out_dir);
    const fs::path json_path = fs::path(opts.out_dir) / "result.json";
    std::ofstream(json_path) << match_result_to_json(result).dump(2) << "\n";
    if (opts.viz)
        write_viz(img1, img2, result, (fs::path(opts.out_dir) / "viz_1-2.png").string());
    std::cout << "points=" << result.matches.size() << " inliers=" << result.inliers.size()
              << " time_ms=" << result.timings.total_ms << "\n";
    return 0;
}

void print_summary(const EvalReport& report) {
    std::cout << "sequence   pair   method           points  precision  inliers   time_ms\n";
    for (const auto& r : report.rows) {
        std::ostringstream line;
        line.setf(std::ios::fixed);
        line.precision(2);
        line << r.sequence << "  " << r.pair << "  " << r.method << "  " << r.points << "  ";
        if (r.precision_pct) line << *r.precision_pct << "%  ";
        else line << "-  ";
        if (r.inlier_ratio_pct) line << *r.inlier_ratio_pct << "%  ";
        else line << "-  ";
        line << r.time_ms;
        if (!r.error.empty()) line << "  ERROR: " << r.error;
        std::cout << line.str() << "\n";
    }
}

int cmd_eval(const GlobalOptions& opts, const PipelineConfig& cfg, double th,
             const std::string& dataset_dir, const std::vector<std::string>& method_names) {
    Sequence seq;
    try {
        seq = load_sequence(dataset_dir);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    std::vector<Method> methods;
    for (const auto& name : method_names) {
        const auto m = method_from_name(name);
        if (!m) {
            std::cerr << "error: unknown method '" << name
                      << "' (supported: proposed, baseline-asift, fine-only)\n";
            return 1;
        }
        methods.push_back(*m);
    }
    if (methods.empty()) methods.push_back(Method::Proposed);
    BenchmarkOptions bopts;
    bopts.th = th;
    const EvalReport report = run_benchmark(seq, methods, cfg, bopts);
    fs::create_directories(opts.out_dir);
    std::ofstream(fs::path(opts.out_dir) / "report.csv") << report_to_csv(report);
    std::ofstream(fs::path(opts.out_dir) / "report.json")
        << report_to_json(report).dump(2) << "\n";
    print_summary(report);
    return 0;
}

int cmd_sweep(const GlobalOptions& opts, const PipelineConfig& base_cfg, double th,
              const std::string& dataset_dir, const std::string& param,
              const std::vector<double>& values) {
    if (param != "max_points" && param != "delta_s") {
        std::cerr << "error: unknown sweep parameter '" << param
                  << "' (supported: max_points, delta_s)\n";
        return 1;
    }
    if (values.empty()) {
        std::cerr << "error: empty value list\n";
        return 1;
    }
    Sequence seq;
    try {
        seq = load_sequence(dataset_dir);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    std::ostringstream csv;
    csv << "value,pair,precision_pct,time_ms\n";
    csv.setf(std::ios::fixed);
    csv.precision(2);
    BenchmarkOptions bopts;
    bopts.th = th;
    for (double v : values) {
        PipelineConfig cfg = base_cfg;
        if (param == "max_points")
            cfg.max_points_coarse = static_cast<int>(std::lround(v));
        else
            cfg.grid.delta_s = v;
        const EvalReport report = run_benchmark(seq, {Method::Proposed}, cfg, bopts);
        for (const auto& r : report.rows) {
            csv << v << ',' << r.pair << ',';
            if (r.precision_pct) csv << *r.precision_pct;
            csv << ',' << r.time_ms << '\n';
        }
        print_summary(report);
    }
    fs::create_directories(opts.out_dir);
    std::ofstream(fs::path(opts.out_dir) / "sweep.csv") << csv.str();
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Affine-simulation feature matching for large-viewpoint image pairs"};
    app.require_subcommand(1);

    GlobalOptions opts;
    PipelineConfig cfg;
    double th = std::sqrt(3.0);
    app.add_option("--config", opts.config_path, "flat key=value config file");
    app.add_option("--seed", opts.seed, "RANSAC seed override");
    app.add_option("--out", opts.out_dir, "output directory");
    app.add_flag("--viz", opts.viz, "write an annotated side-by-side match image");

    auto* match = app.add_subcommand("match", "match an image pair");
    std::string img1_path, img2_path;
    match->add_option("img1", img1_path, "first image")->required();
    match->add_option("img2", img2_path, "second image")->required();

    auto* eval = app.add_subcommand("eval", "evaluate a dataset sequence");
    std::string dataset_dir;
    std::vector<std::string> method_names;
    std::string th_arg;
    eval->add_option("dataset", dataset_dir, "sequence directory (img1..imgK + H1toXp)")
        ->required();
    eval->add_option("--method", method_names, "proposed | baseline-asift | fine-only");
    eval->add_option("--th", th_arg, "precision threshold (number, sqrt3 or sqrt8)");

    auto* sweep = app.add_subcommand("sweep", "re-run evaluation over a parameter range");
    std::string sweep_dir, sweep_param;
    std::vector<double> sweep_values;
    sweep->add_option("dataset", sweep_dir, "sequence directory")->required();
    sweep->add_option("--param", sweep_param, "max_points | delta_s")->required();
    sweep->add_option("--values", sweep_values, "comma-separated values")->delimiter(',');

    CLI11_PARSE(app, argc, argv);

    try {
        if (!opts.config_path.empty()) apply_config_file(opts.config_path, cfg, th);
        if (!th_arg.empty()) th = parse_threshold(th_arg);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    if (opts.seed) cfg.ransac.seed = *opts.seed;

    if (match->parsed()) return cmd_match(opts, cfg, img1_path, img2_path);
    if (eval->parsed()) return cmd_eval(opts, cfg, th, dataset_dir, method_names);
    if (sweep->parsed()) return cmd_sweep(opts, cfg, th, sweep_dir, sweep_param, sweep_values);
    return 1;
}
