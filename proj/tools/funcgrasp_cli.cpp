/*
 * Copyright 2026 the funcgrasp authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <CLI11.hpp>
#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <thread>

#include "funcgrasp/builtin.hpp"
#include "funcgrasp/common.hpp"
#include "funcgrasp/io.hpp"

namespace fs = std::filesystem;
using namespace funcgrasp;

namespace {

int worker_count() {
  if (const char* env = std::getenv("FUNCGRASP_WORKERS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

struct WeightsOption {
  double alpha = -1, beta = -1, gamma = -1;
  bool set = false;
};

void apply_weights(const std::string& csv, EnergyWeights& weights) {
  double a, b, g;
  if (std::sscanf(csv.c_str(), "%lf,%lf,%lf", &a, &b, &g) != 3)
    throw InputError("--weights expects three comma-separated numbers a,b,g");
  weights.alpha = a;
  weights.beta = b;
  weights.gamma = g;
  weights.validate();
}

int cmd_heatmap(const fs::path& scenario_path, const fs::path& hand_path,
                const fs::path& out_dir, std::int64_t seed_override,
                int points_override) {
  const LoadedScenario scenario = realize_scenario(scenario_path);
  const HandModel hand = load_hand_file(hand_path);

  HeatmapParams params = scenario.config.heatmap;
  if (seed_override >= 0) params.seed = static_cast<std::uint64_t>(seed_override);
  if (points_override > 0) params.n_points = points_override;

  ApproachHeatmap heatmap =
      generate_heatmap(hand, scenario.mesh, scenario.region, params, worker_count());
  heatmap.hand_id = hand.name;
  heatmap.object_id = scenario.config.name;
  heatmap.hand_hash = hand_hash(hand);
  heatmap.object_hash = object_hash(scenario);

  write_heatmap_artifacts(heatmap, scenario.mesh, out_dir);

  int reachable = 0;
  for (const ApproachPoint& point : heatmap.points)
    if (point.reachable) ++reachable;
  std::cout << "heatmap: " << heatmap.points.size() << " points, " << reachable
            << " reachable, " << heatmap.clusters.size() << " clusters";
  if (heatmap.selected_cluster.has_value()) {
    const ClusterStat& stat = heatmap.clusters[*heatmap.selected_cluster];
    std::cout << ", selected label " << stat.label << " (" << stat.count
              << " points, mean score " << stat.mean_norm_score << ")";
  } else {
    std::cout << ", no cluster selected";
  }
  std::cout << "\nwrote " << (out_dir / "heatmap.json").string() << " (+.ply, .csv)\n";
  return 0;
}

int cmd_plan(const fs::path& scenario_path, const fs::path& hand_path,
             const fs::path& heatmap_path, const fs::path& out_dir,
             int steps_override, std::int64_t seed_override,
             const std::string& weights_csv) {
  const LoadedScenario scenario = realize_scenario(scenario_path);
  const HandModel hand = load_hand_file(hand_path);
  const std::string heatmap_bytes = read_text_file(heatmap_path);
  const ApproachHeatmap heatmap = load_heatmap_file(heatmap_path);

  if (heatmap.hand_hash != hand_hash(hand))
    throw ProvenanceError("heatmap was generated for hand '" + heatmap.hand_id +
                          "' (hash " + heatmap.hand_hash + "), not for '" + hand.name +
                          "' (hash " + hand_hash(hand) + ")");
  if (heatmap.object_hash != object_hash(scenario))
    throw ProvenanceError("heatmap object hash " + heatmap.object_hash +
                          " does not match scenario '" + scenario.config.name + "'");

  EvaluationParams params = scenario.config.energy;
  if (!weights_csv.empty()) apply_weights(weights_csv, params.weights);
  AnnealingSchedule schedule = scenario.config.planner;
  if (steps_override > 0) schedule.steps = steps_override;
  std::vector<std::uint64_t> seeds = scenario.config.seeds;
  if (seed_override >= 0) seeds = {static_cast<std::uint64_t>(seed_override)};

  const MeshQuery object_query(scenario.mesh);
  const MeshQuery region_query(scenario.mesh, scenario.region.face_ids);
  const PlannerScene scene{hand,   scenario.mesh,   object_query, region_query,
                           scenario.region, heatmap, params};

  std::vector<GraspCandidate> candidates(seeds.size());
  {
    std::atomic<size_t> cursor{0};
    const int n_workers =
        std::min<int>(worker_count(), static_cast<int>(seeds.size()));
    const auto run = [&] {
      for (size_t i = cursor.fetch_add(1); i < seeds.size(); i = cursor.fetch_add(1))
        candidates[i] = anneal(scene, schedule, seeds[i]);
    };
    if (n_workers <= 1) {
      run();
    } else {
      std::vector<std::thread> pool;
      for (int w = 0; w < n_workers; ++w) pool.emplace_back(run);
      for (std::thread& t : pool) t.join();
    }
  }

  fs::create_directories(out_dir);
  Provenance provenance;
  provenance.hand_id = hand.name;
  provenance.object_id = scenario.config.name;
  provenance.hand_hash = hand_hash(hand);
  provenance.object_hash = object_hash(scenario);
  provenance.heatmap_hash = fnv1a_hex(heatmap_bytes);

  size_t best = 0;
  for (size_t i = 0; i < candidates.size(); ++i) {
    Provenance p = provenance;
    p.seed = seeds[i];
    write_text_file(out_dir / ("grasp_seed" + std::to_string(seeds[i]) + ".json"),
                    grasp_to_json(candidates[i], p).dump(1));
    if (candidates[i].energy.hybrid < candidates[best].energy.hybrid ||
        (candidates[i].energy.hybrid == candidates[best].energy.hybrid &&
         seeds[i] < seeds[best]))
      best = i;
    std::cout << "seed " << seeds[i] << ": hybrid " << candidates[i].energy.hybrid
              << " (contact " << candidates[i].energy.contact << ", functional "
              << candidates[i].energy.functional << ", palm "
              << candidates[i].energy.palm << ")\n";
  }
  Provenance p = provenance;
  p.seed = seeds[best];
  write_text_file(out_dir / "best.json", grasp_to_json(candidates[best], p).dump(1));
  std::cout << "best: seed " << seeds[best] << " hybrid "
            << candidates[best].energy.hybrid << " -> "
            << (out_dir / "best.json").string() << "\n";
  return 0;
}

int cmd_evaluate(const fs::path& scenario_path, const fs::path& hand_path,
                 const fs::path& grasp_path, const fs::path& out_dir) {
  const LoadedScenario scenario = realize_scenario(scenario_path);
  const HandModel hand = load_hand_file(hand_path);
  const LoadedGrasp grasp = load_grasp_file(grasp_path);

  if (grasp.provenance.hand_hash != hand_hash(hand))
    throw ProvenanceError("grasp was planned for hand hash " +
                          grasp.provenance.hand_hash + ", not " + hand_hash(hand));
  if (grasp.provenance.object_hash != object_hash(scenario))
    throw ProvenanceError("grasp object hash " + grasp.provenance.object_hash +
                          " does not match scenario '" + scenario.config.name + "'");

  const MeshQuery object_query(scenario.mesh);
  const MeshQuery region_query(scenario.mesh, scenario.region.face_ids);
  const ApproachHeatmap no_heatmap;  // finalize does not consult it
  const PlannerScene scene{hand,   scenario.mesh,   object_query, region_query,
                           scenario.region, no_heatmap, scenario.config.energy};

  const FinalizeResult closed =
      finalize_grasp(grasp.candidate, scene, scenario.config.finalize);

  EvaluationOutput output;
  output.q_closed = closed.q_closed;
  output.non_grasping = closed.non_grasping;
  output.contacts = detect_contacts(closed.q_closed, hand, grasp.candidate.state.wrist(),
                                    object_query, scenario.config.friction,
                                    scenario.config.finalize.contact_threshold_mm);

  output.functional_distance_mm = std::numeric_limits<double>::infinity();
  for (const WorldContact& contact :
       world_contacts(hand, grasp.candidate.state.wrist(), closed.q_closed))
    if (contact.functional)
      output.functional_distance_mm =
          std::min(output.functional_distance_mm,
                   region_query.closest_point(contact.position).distance);

  Eigen::Vector3d center;
  double radius = 0.0;
  scenario.mesh.bounding_sphere(center, radius);
  QualityOptions opts = scenario.config.quality;
  opts.workers = worker_count();
  output.report = evaluate_quality(output.contacts, center, radius, opts);

  fs::create_directories(out_dir);
  write_text_file(out_dir / "quality.json",
                  evaluation_to_json(output, grasp.provenance).dump(1));
  std::cout << "contacts " << output.contacts.size() << ", epsilon "
            << output.report.epsilon << ", nu " << output.report.nu << " (se "
            << output.report.nu_standard_error << "), force closure "
            << (output.report.force_closure ? "yes" : "no")
            << ", functional distance " << output.functional_distance_mm << " mm\n"
            << "wrote " << (out_dir / "quality.json").string() << "\n";
  return 0;
}

int cmd_demo(const std::string& name, const fs::path& out_dir) {
  const std::vector<fs::path> scenarios = write_demo(name, out_dir);
  std::cout << "wrote demo '" << name << "' into " << out_dir.string() << ":\n";
  for (const fs::path& path : scenarios) std::cout << "  " << path.string() << "\n";
  return 0;
}

int cmd_export(const fs::path& heatmap_path, const fs::path& scenario_path,
               const fs::path& out_dir) {
  const LoadedScenario scenario = realize_scenario(scenario_path);
  const ApproachHeatmap heatmap = load_heatmap_file(heatmap_path);
  if (heatmap.object_hash != object_hash(scenario))
    throw ProvenanceError("heatmap object hash does not match the scenario mesh/region");
  fs::create_directories(out_dir);
  write_text_file(out_dir / "heatmap.csv", heatmap_csv(heatmap));
  write_text_file(out_dir / "heatmap.ply", heatmap_ply(heatmap, scenario.mesh));
  std::cout << "wrote " << (out_dir / "heatmap.ply").string() << " and heatmap.csv\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"functional grasp planning toolkit"};
  app.require_subcommand(1);

  std::string scenario, hand, heatmap, grasp, out = ".", demo_name, weights;
  std::int64_t seed = -1;
  int steps = 0, points = 0;

  CLI::App* c_heatmap = app.add_subcommand(
      "heatmap", "grade palm approach points and select the grasp region");
  c_heatmap->add_option("--scenario", scenario, "scenario JSON")->required();
  c_heatmap->add_option("--hand", hand, "hand config JSON")->required();
  c_heatmap->add_option("--out", out, "output directory");
  c_heatmap->add_option("--seed", seed, "override the heatmap seed");
  c_heatmap->add_option("--points", points, "override the approach point count");

  CLI::App* c_plan = app.add_subcommand("plan", "anneal a grasp in the eigengrasp space");
  c_plan->add_option("--scenario", scenario, "scenario JSON")->required();
  c_plan->add_option("--hand", hand, "hand config JSON")->required();
  c_plan->add_option("--heatmap", heatmap, "heatmap JSON artifact")->required();
  c_plan->add_option("--out", out, "output directory");
  c_plan->add_option("--steps", steps, "override the annealing step count");
  c_plan->add_option("--seed", seed, "run a single seed instead of the scenario list");
  c_plan->add_option("--weights", weights, "override energy weights a,b,g");

  CLI::App* c_eval = app.add_subcommand(
      "evaluate", "close the fingers and score the grasp wrench space");
  c_eval->add_option("--scenario", scenario, "scenario JSON")->required();
  c_eval->add_option("--hand", hand, "hand config JSON")->required();
  c_eval->add_option("--grasp", grasp, "grasp JSON from plan")->required();
  c_eval->add_option("--out", out, "output directory");

  CLI::App* c_demo = app.add_subcommand("demo", "write a built-in demo scenario");
  c_demo->add_option("name", demo_name, "spray | remote | plate")->required();
  c_demo->add_option("--out", out, "output directory");

  CLI::App* c_export = app.add_subcommand(
      "export", "re-emit PLY/CSV views from a heatmap JSON artifact");
  c_export->add_option("--heatmap", heatmap, "heatmap JSON artifact")->required();
  c_export->add_option("--scenario", scenario, "scenario JSON (for the mesh)")->required();
  c_export->add_option("--out", out, "output directory");

  CLI11_PARSE(app, argc, argv);

  try {
    if (c_heatmap->parsed()) return cmd_heatmap(scenario, hand, out, seed, points);
    if (c_plan->parsed()) return cmd_plan(scenario, hand, heatmap, out, steps, seed, weights);
    if (c_eval->parsed()) return cmd_evaluate(scenario, hand, grasp, out);
    if (c_demo->parsed()) return cmd_demo(demo_name, out);
    if (c_export->parsed()) return cmd_export(heatmap, scenario, out);
  } catch (const ProvenanceError& e) {
    std::cerr << "provenance error: " << e.what() << "\n";
    return 3;
  } catch (const PlanningRefusal& e) {
    std::cerr << "planning refused: " << e.what() << "\n";
    return 4;
  } catch (const InputError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return 2;
  } catch (const Json::exception& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
