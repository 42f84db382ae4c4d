// acdcgrid: command-line front end for the AC/DC grid structure toolbox.
//
// Subcommands cover the full pipeline: topology analysis and orientation,
// state-space assembly, controller synthesis, simulation, and structure
// verification. Exit codes: 0 ok, 2 document/schema problems, 3 infeasible
// orientation, 4 structure violation, 5 numerical failure, 1 anything else.

#include <cstdio>
#include <iostream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "acdc/dq_model.hpp"
#include "acdc/errors.hpp"
#include "acdc/grid.hpp"
#include "acdc/io.hpp"
#include "acdc/linear_model.hpp"
#include "acdc/poset.hpp"
#include "acdc/simulate.hpp"
#include "acdc/synthesis.hpp"
#include "acdc/test_system.hpp"

namespace {

using namespace acdc;

std::uint64_t g_seed = 0;
double g_tol = 1e-9;
std::string g_command_line;

// "AC2" -> "AC subgrid 2", for the classification summary.
std::string subgrid_phrase(const std::string& name) {
    return name.substr(0, 2) + " subgrid " + name.substr(2);
}

std::string classification_phrase(const StructureClass& cls) {
    std::string out = to_string(cls.tag);
    if (cls.tag == StructureClass::Tag::LeaderFollower)
        out += ", leader = " + subgrid_phrase(cls.leader);
    if (cls.tag == StructureClass::Tag::Coordinated) {
        out += ", coordinator = ";
        for (std::size_t i = 0; i < cls.coordinator.size(); ++i) {
            if (i) out += " + ";
            out += subgrid_phrase(cls.coordinator[i]);
        }
    }
    return out;
}

std::string metrics_path(const std::string& out) {
    const auto slash = out.find_last_of('/');
    const auto dot = out.find_last_of('.');
    if (dot != std::string::npos && (slash == std::string::npos || dot > slash))
        return out.substr(0, dot) + ".metrics.json";
    return out + ".metrics.json";
}

RunManifest make_manifest(const std::vector<std::string>& input_paths) {
    RunManifest manifest;
    manifest.command = g_command_line;
    manifest.seed = g_seed;
    manifest.tolerances["tol"] = g_tol;
    for (const std::string& path : input_paths)
        manifest.inputs[path] = digest_hex(read_file(path));
    return manifest;
}

void emit(const std::string& path, const std::string& content, RunManifest manifest) {
    write_file(path, content);
    manifest.outputs.push_back(path);
    write_manifest(manifest, path);
}

// ----------------------------------------------------------------------
// Subcommand bodies
// ----------------------------------------------------------------------

void run_analyze(const std::string& grid_path) {
    const ParsedGrid parsed = load_grid(grid_path);
    const GridGraph oriented = orient_converters(parsed.grid);
    const SubgridMap map = connected_components(oriented);
    const QuotientGraph quotient = build_quotient_graph(oriented, map);

    std::cout << "ac subgrids: " << map.ac_count << " (buses: "
              << oriented.ac_buses.size() << ")\n";
    std::cout << "dc subgrids: " << map.dc_count << " (buses: "
              << oriented.dc_buses.size() << ")\n";
    std::cout << "converters: " << oriented.converters.size() << " across "
              << quotient.underlying_edges.size() << " subgrid pair"
              << (quotient.underlying_edges.size() == 1 ? "" : "s") << "\n";
    std::cout << "quotient edges:\n";
    for (const auto& [a, b] : quotient.edges)
        std::cout << "  " << quotient.nodes[a].name << " -> "
                  << quotient.nodes[b].name << "\n";

    const Poset poset = poset_from_dag(quotient);
    const StructureClass cls = classify_structure(poset, quotient);
    std::cout << "classification: " << classification_phrase(cls) << "\n";
}

void run_orient(const std::string& grid_path, const std::string& strategy,
                const std::string& out) {
    ParsedGrid parsed = load_grid(grid_path);
    const OrientationStrategy s = strategy == "dc-first"
                                      ? OrientationStrategy::DcSubgridsFirst
                                      : OrientationStrategy::AcSubgridsFirst;
    parsed.grid = orient_converters(parsed.grid, s);
    const std::string text = serialize_grid(parsed);
    if (out.empty()) {
        std::cout << text;
    } else {
        emit(out, text, make_manifest({grid_path}));
        std::cout << "wrote " << out << "\n";
    }
}

void run_count(const std::string& grid_path, bool enumerate) {
    const ParsedGrid parsed = load_grid(grid_path);
    const SubgridMap map = connected_components(parsed.grid);
    const QuotientGraph quotient = build_quotient_graph(parsed.grid, map);
    const std::int64_t count = count_acyclic_orientations(quotient);
    std::cout << count << "\n";
    if (enumerate) {
        const auto all = enumerate_acyclic_orientations(quotient);
        std::cout << "enumeration: " << all.size() << " orientations\n";
        if (static_cast<std::int64_t>(all.size()) != count)
            throw InvariantError("deletion-contraction count disagrees with enumeration");
    }
}

void print_lemma1(const Lemma1Report& report, bool p22_ok) {
    std::cout << "A block diagonal: " << (report.a_block_diagonal ? "yes" : "NO") << "\n";
    std::cout << "B in incidence algebra: " << (report.b_membership.ok ? "yes" : "NO") << "\n";
    for (const auto& [r, c] : report.b_membership.violations)
        std::cout << "  violation: input block " << r << " <- state block " << c << "\n";
    std::cout << "P22 structure: " << (p22_ok ? "ok" : "VIOLATED") << "\n";
}

void run_build_ss(const std::string& grid_path, const std::string& out) {
    const ParsedGrid parsed = load_grid(grid_path);
    const GridGraph oriented = orient_converters(parsed.grid);
    const StateSpace ss = build_linear_statespace(oriented, parsed.params, parsed.cost);
    const Poset poset = statespace_poset(oriented, ss);
    print_lemma1(verify_lemma1(ss, poset), p22_structure_check(ss, poset, {}, g_tol));
    emit(out, statespace_to_json(ss), make_manifest({grid_path}));
    std::cout << "wrote " << out << " (" << ss.n() << " states, " << ss.m()
              << " inputs)\n";
}

ControllerDocument document_from_report(const StateSpace& ss, const SynthesisReport& report,
                                        const std::string& mode,
                                        const std::vector<std::string>& leader_subgrids,
                                        const std::vector<std::string>& leader_inputs) {
    ControllerDocument doc;
    doc.K = report.gain.K;
    doc.row_partition = report.gain.row_partition.sizes;
    doc.col_partition = report.gain.col_partition.sizes;
    doc.input_labels = ss.input_labels;
    for (const StateLabel& label : ss.state_labels) doc.state_labels.push_back(label.str());
    doc.subgrid_order = ss.subgrid_order;
    doc.mode = mode;
    doc.leader_subgrids = leader_subgrids;
    doc.leader_inputs = leader_inputs;
    doc.h2 = report.h2;
    doc.riccati_residual = report.riccati_residual;
    doc.closed_loop_abscissa = report.closed_loop_abscissa;
    return doc;
}

void run_synthesize(const std::string& grid_path, const std::string& mode,
                    std::vector<std::string> leader_subgrids,
                    std::vector<std::string> leader_inputs, const std::string& out) {
    const ParsedGrid parsed = load_grid(grid_path);
    const GridGraph oriented = orient_converters(parsed.grid);
    const StateSpace ss = build_linear_statespace(oriented, parsed.params, parsed.cost);

    SynthesisReport report;
    if (mode == "centralized") {
        report = synthesize_centralized(ss);
    } else {
        if (leader_subgrids.empty() && leader_inputs.empty()) {
            if (!parsed.leader)
                throw SchemaError("/leader: missing and no --leader/--leader-input given");
            const LeaderDesignation designation = resolve_leader(*parsed.leader, oriented);
            leader_subgrids = designation.subgrids;
            leader_inputs = designation.input_ids;
        }
        report = synthesize_leader_follower(ss, leader_subgrids, leader_inputs);
    }

    std::cout << "mode: " << mode << "\n";
    if (mode != "centralized") {
        std::cout << "leader subgrids:";
        for (const std::string& s : leader_subgrids) std::cout << " " << s;
        std::cout << "\nleader inputs:";
        for (const std::string& s : leader_inputs) std::cout << " " << s;
        std::cout << "\n";
    }
    char line[96];
    std::snprintf(line, sizeof line, "h2 norm: %.6f", report.h2);
    std::cout << line << "\n";
    std::snprintf(line, sizeof line, "riccati residual: %.3e", report.riccati_residual);
    std::cout << line << "\n";
    std::snprintf(line, sizeof line, "closed-loop abscissa: %.6f",
                  report.closed_loop_abscissa);
    std::cout << line << "\n";

    emit(out, controller_to_json(document_from_report(ss, report, mode, leader_subgrids,
                                                      leader_inputs)),
         make_manifest({grid_path}));
    std::cout << "wrote " << out << "\n";
}

void check_controller_matches(const ControllerDocument& doc, const StateSpace& ss) {
    if (doc.K.cols() != ss.n() || doc.K.rows() != ss.m())
        throw SchemaError("/k: controller is " + std::to_string(doc.K.rows()) + "x" +
                          std::to_string(doc.K.cols()) + " but the model needs " +
                          std::to_string(ss.m()) + "x" + std::to_string(ss.n()));
    for (int j = 0; j < ss.n(); ++j)
        if (doc.state_labels[j] != ss.state_labels[j].str())
            throw SchemaError("/state_labels/" + std::to_string(j) +
                              ": controller was built for a different model");
}

void run_simulate(const std::string& grid_path, const std::string& controller_path,
                  const std::string& x0_path, double dt, double horizon,
                  const std::string& out) {
    const ParsedGrid parsed = load_grid(grid_path);
    const GridGraph oriented = orient_converters(parsed.grid);
    const StateSpace ss = build_linear_statespace(oriented, parsed.params, parsed.cost);

    GainMatrix gain;
    const GainMatrix* gain_ptr = nullptr;
    if (!controller_path.empty()) {
        const ControllerDocument doc = controller_from_json(read_file(controller_path));
        check_controller_matches(doc, ss);
        gain = controller_gain(doc);
        gain_ptr = &gain;
    }

    Eigen::VectorXd x0 = Eigen::VectorXd::Zero(ss.n());
    if (!x0_path.empty()) x0 = parse_initial_state(read_file(x0_path), ss);

    SimConfig cfg;
    cfg.dt = dt;
    cfg.horizon = horizon;
    cfg.seed = g_seed;
    const Trace trace = simulate_linear(ss, gain_ptr, x0, cfg);

    Eigen::MatrixXd r = ss.R();
    if (!gain_ptr) r.resize(0, 0);  // open loop records no inputs
    const TraceMetrics metrics = trace_metrics(trace, ss.Q(), r);

    std::vector<std::string> inputs{grid_path};
    if (!controller_path.empty()) inputs.push_back(controller_path);
    if (!x0_path.empty()) inputs.push_back(x0_path);
    RunManifest manifest = make_manifest(inputs);
    write_file(out, trace_to_csv(trace));
    manifest.outputs.push_back(out);
    const std::string mpath = metrics_path(out);
    write_file(mpath, metrics_to_json(metrics));
    manifest.outputs.push_back(mpath);
    write_manifest(manifest, out);
    std::cout << "wrote " << out << " and " << mpath << " (" << trace.steps()
              << " samples)\n";
}

int run_verify(const std::string& grid_path, const std::string& controller_path) {
    const ParsedGrid parsed = load_grid(grid_path);
    const GridGraph oriented = orient_converters(parsed.grid);
    const StateSpace ss = build_linear_statespace(oriented, parsed.params, parsed.cost);
    const ControllerDocument doc = controller_from_json(read_file(controller_path));
    check_controller_matches(doc, ss);

    if (doc.mode == "leader-follower") {
        // Leader rows may only read leader-subgrid states.
        const std::set<std::string> leader_set(doc.leader_subgrids.begin(),
                                               doc.leader_subgrids.end());
        const std::set<std::string> leader_inputs(doc.leader_inputs.begin(),
                                                  doc.leader_inputs.end());
        int violations = 0;
        for (int r = 0; r < ss.m(); ++r) {
            if (!leader_inputs.count(ss.input_labels[r])) continue;
            for (int c = 0; c < ss.n(); ++c) {
                if (leader_set.count(ss.state_labels[c].subgrid)) continue;
                if (std::abs(doc.K(r, c)) > g_tol) {
                    ++violations;
                    std::cout << "violation: input " << ss.input_labels[r]
                              << " feeds back from " << ss.state_labels[c].str() << "\n";
                }
            }
        }
        if (violations) {
            std::cout << "structure: VIOLATED (" << violations << " entries)\n";
            return 4;
        }
        std::cout << "structure: ok (leader rows confined to leader states)\n";
        return 0;
    }

    const Poset poset = statespace_poset(oriented, ss);
    const MembershipReport report = in_block_incidence_algebra(
        doc.K, BlockPartition{doc.row_partition}, BlockPartition{doc.col_partition},
        poset, g_tol);
    if (!report.ok) {
        for (const auto& [r, c] : report.violations)
            std::cout << "violation: input block " << r << " <- state block " << c << "\n";
        std::cout << "structure: VIOLATED (" << report.violations.size() << " blocks)\n";
        return 4;
    }
    std::cout << "structure: ok (gain lies in the block incidence algebra)\n";
    return 0;
}

void run_dq_couplings(const std::string& variant_name, bool const_ac, bool const_dc,
                      const std::string& cross, const std::vector<std::string>& loop_names) {
    ModelVariant variant;
    if (variant_name == "full") variant.base = ModelBase::Full;
    else if (variant_name == "beta") variant.base = ModelBase::BetaSub;
    else if (variant_name == "rho") variant.base = ModelBase::RhoSub;
    else if (variant_name == "timescale") variant.base = ModelBase::Timescale;
    else throw SchemaError("--variant: expected full|beta|rho|timescale");
    variant.const_ac_voltage = const_ac;
    variant.const_dc_voltage = const_dc;
    variant.cross_sign = cross == "antisymmetric" ? CrossSign::Antisymmetric
                                                  : CrossSign::Paper;

    std::set<LocalLoop> loops;
    for (const std::string& name : loop_names) {
        if (name == "reactive_power") loops.insert(LocalLoop::ReactivePower);
        else if (name == "dc_voltage") loops.insert(LocalLoop::DcVoltage);
        else if (name == "power_transfer_dc_side") loops.insert(LocalLoop::PowerTransferDcSide);
        else if (name == "power_transfer_ac_side") loops.insert(LocalLoop::PowerTransferAcSide);
        else throw SchemaError("--loops: unknown loop \"" + name + "\"");
    }

    const CouplingGraph graph = coupling_graph(variant, loops, DqParams{}, g_seed);
    std::cout << "coupling edges:\n";
    for (const SignalEdge& edge : graph)
        std::cout << "  " << to_string(edge.from) << " -> " << to_string(edge.to)
                  << " [" << to_string(edge.kind) << "]\n";
    std::cout << "partition: " << to_string(partition_type(variant, loops, DqParams{}, g_seed))
              << "\n";
}

void run_export_dot(const std::string& grid_path, const std::string& level,
                    const std::string& out) {
    const ParsedGrid parsed = load_grid(grid_path);
    std::string text;
    if (level == "bus") {
        text = to_dot_bus(parsed.grid);
    } else if (level == "subgrid") {
        const SubgridMap map = connected_components(parsed.grid);
        text = to_dot_subgrid(build_quotient_graph(parsed.grid, map));
    } else {
        throw SchemaError("--level: expected bus|subgrid");
    }
    if (out.empty()) {
        std::cout << text;
    } else {
        emit(out, text, make_manifest({grid_path}));
        std::cout << "wrote " << out << "\n";
    }
}

}  // namespace

int main(int argc, char** argv) {
    for (int i = 0; i < argc; ++i) {
        if (i) g_command_line += " ";
        g_command_line += argv[i];
    }

    CLI::App app{"AC/DC grid information-structure toolbox"};
    app.require_subcommand(1);
    app.add_option("--seed", g_seed, "seed for randomized checks");
    app.add_option("--tol", g_tol, "tolerance for structure checks");

    std::string grid_path, out, controller_path, x0_path;
    std::string strategy = "ac-first", mode, variant = "full", cross = "paper";
    std::string level = "bus";
    std::vector<std::string> leader_subgrids, leader_inputs, loop_names;
    bool enumerate = false, const_ac = false, const_dc = false;
    double dt = 1e-4, horizon = 10.0;

    CLI::App* analyze = app.add_subcommand("analyze", "summarize topology and structure class");
    analyze->add_option("grid", grid_path)->required();

    CLI::App* orient = app.add_subcommand("orient", "complete the converter orientation");
    orient->add_option("grid", grid_path)->required();
    orient->add_option("--strategy", strategy)->check(CLI::IsMember({"ac-first", "dc-first"}));
    orient->add_option("--out", out);

    CLI::App* count = app.add_subcommand("count-orientations",
                                         "count acyclic orientations of the quotient");
    count->add_option("grid", grid_path)->required();
    count->add_flag("--enumerate", enumerate, "cross-check by brute force");

    CLI::App* build_ss = app.add_subcommand("build-ss", "assemble the linear state space");
    build_ss->add_option("grid", grid_path)->required();
    build_ss->add_option("--out", out)->required();

    CLI::App* synthesize = app.add_subcommand("synthesize", "design an H2 state feedback");
    synthesize->add_option("grid", grid_path)->required();
    synthesize->add_option("--mode", mode)
        ->required()
        ->check(CLI::IsMember({"centralized", "leader-follower"}));
    synthesize->add_option("--leader", leader_subgrids, "leader subgrid names");
    synthesize->add_option("--leader-input", leader_inputs, "leader converter ids");
    synthesize->add_option("--out", out)->required();

    CLI::App* simulate = app.add_subcommand("simulate", "integrate the closed or open loop");
    simulate->add_option("grid", grid_path)->required();
    simulate->add_option("--controller", controller_path);
    simulate->add_option("--x0", x0_path);
    simulate->add_option("--dt", dt);
    simulate->add_option("--horizon", horizon);
    simulate->add_option("--out", out)->required();

    CLI::App* verify = app.add_subcommand("verify", "check a gain against the structure");
    verify->add_option("grid", grid_path)->required();
    verify->add_option("--controller", controller_path)->required();

    CLI::App* dq = app.add_subcommand("dq-couplings", "print dq signal couplings");
    dq->add_option("--variant", variant)
        ->check(CLI::IsMember({"full", "beta", "rho", "timescale"}));
    dq->add_flag("--const-ac", const_ac, "hold the ac voltage constant");
    dq->add_flag("--const-dc", const_dc, "hold the dc voltage constant");
    dq->add_option("--cross", cross)->check(CLI::IsMember({"paper", "antisymmetric"}));
    dq->add_option("--loops", loop_names, "local converter loops");

    CLI::App* export_dot = app.add_subcommand("export-dot", "render the grid as DOT");
    export_dot->add_option("grid", grid_path)->required();
    export_dot->add_option("--level", level)->check(CLI::IsMember({"bus", "subgrid"}));
    export_dot->add_option("--out", out);

    CLI11_PARSE(app, argc, argv);

    try {
        if (*analyze) run_analyze(grid_path);
        else if (*orient) run_orient(grid_path, strategy, out);
        else if (*count) run_count(grid_path, enumerate);
        else if (*build_ss) run_build_ss(grid_path, out);
        else if (*synthesize) run_synthesize(grid_path, mode, leader_subgrids, leader_inputs, out);
        else if (*simulate) run_simulate(grid_path, controller_path, x0_path, dt, horizon, out);
        else if (*verify) return run_verify(grid_path, controller_path);
        else if (*dq) run_dq_couplings(variant, const_ac, const_dc, cross, loop_names);
        else if (*export_dot) run_export_dot(grid_path, level, out);
    } catch (const CycleForced& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const CoOrientationConflict& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const UnorientedConverter& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const NotAcyclic& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const LeaderNotSelfContained& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    } catch (const ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const SchemaError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const InvariantError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const UnknownElement& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const MissingParameter& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const DimensionMismatch& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const VariantMismatch& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const Error& e) {
        // remaining library errors are numerical failures
        std::cerr << "error: " << e.what() << "\n";
        return 5;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
