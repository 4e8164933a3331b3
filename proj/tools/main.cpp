// floorloc command-line tool: calibrate, localize, fuse, evaluate, synth.

#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "floorloc/cli.hpp"

int main(int argc, char** argv) {
    using namespace floorloc::cli;

    CLI::App app{"camera-to-floor pedestrian localization toolkit"};
    app.require_subcommand(1);

    CalibrateCmd calibrate;
    auto* cal = app.add_subcommand("calibrate", "solve a scene's floor homography");
    cal->add_option("--scene", calibrate.scene_path, "scene config file")->required();
    cal->add_option("--out", calibrate.out_path, "also write the parameters to this file");

    LocalizeCmd localize;
    auto* loc = app.add_subcommand("localize", "detections to floor positions");
    loc->add_option("--scene", localize.scene_paths, "scene config (repeatable, ordered)")
        ->required();
    loc->add_option("--detections", localize.detection_paths,
                    "detections file (repeatable, paired with --scene by order)")
        ->required();
    loc->add_option("--method", localize.method, "pose|bbox|bbox-extended");
    loc->add_option("--conf-threshold", localize.conf_threshold, "joint/box confidence cutoff");
    loc->add_option("--aspect", localize.aspect, "target height/width for bbox-extended");
    loc->add_option("--proportions", localize.proportions_path, "body proportion table file");
    loc->add_flag("--fuse", localize.fuse, "fuse the cameras into one track");
    loc->add_option("--jobs", localize.jobs, "per-frame worker count");
    loc->add_option("--out", localize.out_path, "positions CSV to write")->required();

    FuseCmd fuse;
    auto* fus = app.add_subcommand("fuse", "fuse per-camera positions CSVs");
    fus->add_option("--scene", fuse.scene_paths, "scene config (repeatable, ordered)")
        ->required();
    fus->add_option("--predictions", fuse.prediction_paths,
                    "positions CSV (repeatable, paired with --scene by order)")
        ->required();
    fus->add_option("--out", fuse.out_path, "fused positions CSV to write")->required();

    EvaluateCmd evaluate;
    auto* eva = app.add_subcommand("evaluate", "score positions against ground truth");
    eva->add_option("--predictions", evaluate.predictions_path, "positions CSV")->required();
    eva->add_option("--annotations", evaluate.annotation_paths,
                    "ground-truth CSV (one file, or two to merge)")
        ->required();
    eva->add_option("--scene", evaluate.scene_path,
                    "scene config for the error-vs-distance correlation");
    eva->add_option("--labels", evaluate.labels_path, "scenario labels CSV for per-type reports");
    eva->add_option("--out", evaluate.out_path, "report file to write")->required();
    eva->add_option("--cdf-out", evaluate.cdf_out_path, "error CDF CSV to write");

    SynthCmd synth;
    auto* syn = app.add_subcommand("synth", "generate a deterministic synthetic corpus");
    syn->add_option("--out", synth.out_dir, "output directory")->required();
    syn->add_option("--seed", synth.seed, "random seed");
    syn->add_option("--frames", synth.frames, "number of frames");
    syn->add_option("--cameras", synth.cameras, "1 (front) or 2 (front + side)");
    syn->add_option("--jitter", synth.jitter_sigma_px, "gaussian pixel noise sigma");
    syn->add_option("--occlude", synth.occlude,
                    "body level to delete: eye|shoulder|hip|knee|ankle (repeatable)");
    syn->add_option("--proportions", synth.proportions_path, "body proportion table file");
    syn->add_option("--person-height", synth.person_height, "person height, cm");
    syn->add_option("--grid-width", synth.grid_width, "grid width, cm");
    syn->add_option("--grid-height", synth.grid_height, "grid depth, cm");
    syn->add_option("--camera-height", synth.camera_height, "front camera height, cm");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kUsage;
    }

    if (cal->parsed()) return calibrate.execute(std::cout, std::cerr);
    if (loc->parsed()) return localize.execute(std::cout, std::cerr);
    if (fus->parsed()) return fuse.execute(std::cout, std::cerr);
    if (eva->parsed()) return evaluate.execute(std::cout, std::cerr);
    if (syn->parsed()) return synth.execute(std::cout, std::cerr);
    return kUsage;
}
