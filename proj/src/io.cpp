#include "acdc/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "json.hpp"

namespace acdc {

namespace {

using json = nlohmann::json;

// ---------------------------------------------------------------------
// Schema helpers: every rejection carries the path to the offending node.
// ---------------------------------------------------------------------

void check_keys(const json& j, const std::string& path,
                std::initializer_list<const char*> allowed) {
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool known = false;
        for (const char* key : allowed) {
            if (it.key() == key) {
                known = true;
                break;
            }
        }
        if (!known) throw SchemaError(path + "/" + it.key() + ": unknown key");
    }
}

const json& member(const json& j, const std::string& path, const char* key) {
    const auto it = j.find(key);
    if (it == j.end()) throw SchemaError(path + "/" + key + ": missing");
    return *it;
}

const json* optional_member(const json& j, const char* key) {
    const auto it = j.find(key);
    return it == j.end() ? nullptr : &*it;
}

const json& as_object(const json& j, const std::string& path) {
    if (!j.is_object()) throw SchemaError(path + ": expected an object");
    return j;
}

const json& as_array(const json& j, const std::string& path) {
    if (!j.is_array()) throw SchemaError(path + ": expected an array");
    return j;
}

int as_int(const json& j, const std::string& path) {
    if (!j.is_number_integer() && !j.is_number_unsigned())
        throw SchemaError(path + ": expected an integer");
    return j.get<int>();
}

double as_number(const json& j, const std::string& path) {
    if (!j.is_number()) throw SchemaError(path + ": expected a number");
    return j.get<double>();
}

std::string as_string(const json& j, const std::string& path) {
    if (!j.is_string()) throw SchemaError(path + ": expected a string");
    return j.get<std::string>();
}

Line parse_line_key(const std::string& key, const std::string& path) {
    const auto dash = key.find('-');
    if (dash == std::string::npos || dash == 0 || dash + 1 == key.size())
        throw SchemaError(path + ": expected a \"a-b\" pair key");
    try {
        const int a = std::stoi(key.substr(0, dash));
        const int b = std::stoi(key.substr(dash + 1));
        return make_line(a, b);
    } catch (const std::exception&) {
        throw SchemaError(path + ": expected numeric endpoints");
    }
}

Orientation parse_orientation(const std::string& text, const std::string& path) {
    if (text == "ac_to_dc") return Orientation::AcToDc;
    if (text == "dc_to_ac") return Orientation::DcToAc;
    throw SchemaError(path + ": expected \"ac_to_dc\" or \"dc_to_ac\"");
}

LocalLoop parse_loop(const std::string& text, const std::string& path) {
    if (text == "reactive_power") return LocalLoop::ReactivePower;
    if (text == "dc_voltage") return LocalLoop::DcVoltage;
    if (text == "power_transfer_dc_side") return LocalLoop::PowerTransferDcSide;
    if (text == "power_transfer_ac_side") return LocalLoop::PowerTransferAcSide;
    throw SchemaError(path + ": unknown local loop \"" + text + "\"");
}

std::vector<int> parse_bus_array(const json& j, const std::string& path) {
    as_array(j, path);
    std::vector<int> out;
    for (std::size_t i = 0; i < j.size(); ++i)
        out.push_back(as_int(j[i], path + "/" + std::to_string(i)));
    return out;
}

std::set<Line> parse_line_array(const json& j, const std::string& path) {
    as_array(j, path);
    std::set<Line> out;
    for (std::size_t i = 0; i < j.size(); ++i) {
        const std::string at = path + "/" + std::to_string(i);
        as_array(j[i], at);
        if (j[i].size() != 2) throw SchemaError(at + ": expected [a, b]");
        out.insert(make_line(as_int(j[i][0], at + "/0"), as_int(j[i][1], at + "/1")));
    }
    return out;
}

// ---------------------------------------------------------------------
// Matrix/vector conversions
// ---------------------------------------------------------------------

json matrix_to_json(const Eigen::MatrixXd& M) {
    json rows = json::array();
    for (int r = 0; r < M.rows(); ++r) {
        json row = json::array();
        for (int c = 0; c < M.cols(); ++c) row.push_back(M(r, c));
        rows.push_back(std::move(row));
    }
    return rows;
}

Eigen::MatrixXd matrix_from_json(const json& j, const std::string& path) {
    as_array(j, path);
    const int rows = static_cast<int>(j.size());
    int cols = -1;
    for (int r = 0; r < rows; ++r) {
        const std::string at = path + "/" + std::to_string(r);
        as_array(j[r], at);
        if (cols < 0) cols = static_cast<int>(j[r].size());
        if (static_cast<int>(j[r].size()) != cols)
            throw SchemaError(at + ": ragged matrix rows");
    }
    Eigen::MatrixXd M(rows, std::max(cols, 0));
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c)
            M(r, c) = as_number(j[r][c], path + "/" + std::to_string(r) + "/" +
                                             std::to_string(c));
    return M;
}

json vector_to_json(const Eigen::VectorXd& v) {
    json out = json::array();
    for (int i = 0; i < v.size(); ++i) out.push_back(v(i));
    return out;
}

Eigen::VectorXd vector_from_json(const json& j, const std::string& path) {
    as_array(j, path);
    Eigen::VectorXd v(j.size());
    for (std::size_t i = 0; i < j.size(); ++i)
        v(i) = as_number(j[i], path + "/" + std::to_string(i));
    return v;
}

std::vector<std::string> strings_from_json(const json& j, const std::string& path) {
    as_array(j, path);
    std::vector<std::string> out;
    for (std::size_t i = 0; i < j.size(); ++i)
        out.push_back(as_string(j[i], path + "/" + std::to_string(i)));
    return out;
}

std::vector<int> ints_from_json(const json& j, const std::string& path) {
    as_array(j, path);
    std::vector<int> out;
    for (std::size_t i = 0; i < j.size(); ++i)
        out.push_back(as_int(j[i], path + "/" + std::to_string(i)));
    return out;
}

StateLabel parse_state_label(const std::string& text, const std::string& path) {
    const auto first = text.find(':');
    const auto second = first == std::string::npos ? first : text.find(':', first + 1);
    if (first == std::string::npos || second == std::string::npos)
        throw SchemaError(path + ": expected \"subgrid:kind:element\"");
    StateLabel label;
    label.subgrid = text.substr(0, first);
    label.element = text.substr(second + 1);
    const std::string kind = text.substr(first + 1, second - first - 1);
    if (kind == "theta") label.kind = StateKind::Angle;
    else if (kind == "omega") label.kind = StateKind::Frequency;
    else if (kind == "v") label.kind = StateKind::DcVoltage;
    else if (kind == "i") label.kind = StateKind::DcLineCurrent;
    else throw SchemaError(path + ": unknown state kind \"" + kind + "\"");
    return label;
}

json parse_json_text(const std::string& text) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(e.what());
    }
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

}  // namespace

// ---------------------------------------------------------------------
// Grid documents
// ---------------------------------------------------------------------

ParsedGrid parse_grid(const std::string& text) {
    const json j = parse_json_text(text);
    as_object(j, "/");
    check_keys(j, "", {"ac_buses", "dc_buses", "ac_lines", "dc_lines", "converters",
                       "params", "cost", "base", "leader"});

    ParsedGrid out;
    GridGraph& grid = out.grid;
    for (int b : parse_bus_array(member(j, "", "ac_buses"), "/ac_buses"))
        grid.ac_buses.insert(b);
    for (int b : parse_bus_array(member(j, "", "dc_buses"), "/dc_buses"))
        grid.dc_buses.insert(b);
    grid.ac_lines = parse_line_array(member(j, "", "ac_lines"), "/ac_lines");
    grid.dc_lines = parse_line_array(member(j, "", "dc_lines"), "/dc_lines");

    const json& converters = as_array(member(j, "", "converters"), "/converters");
    for (std::size_t i = 0; i < converters.size(); ++i) {
        const std::string at = "/converters/" + std::to_string(i);
        const json& c = as_object(converters[i], at);
        check_keys(c, at, {"ac_bus", "dc_bus", "orientation", "loops"});
        Converter conv;
        conv.ac_bus = as_int(member(c, at, "ac_bus"), at + "/ac_bus");
        conv.dc_bus = as_int(member(c, at, "dc_bus"), at + "/dc_bus");
        if (const json* o = optional_member(c, "orientation"))
            conv.orientation =
                parse_orientation(as_string(*o, at + "/orientation"), at + "/orientation");
        if (const json* loops = optional_member(c, "loops")) {
            as_array(*loops, at + "/loops");
            for (std::size_t l = 0; l < loops->size(); ++l) {
                const std::string lp = at + "/loops/" + std::to_string(l);
                conv.loops.insert(parse_loop(as_string((*loops)[l], lp), lp));
            }
        }
        grid.converters.push_back(std::move(conv));
    }

    grid.validate();

    if (const json* base = optional_member(j, "base")) {
        as_object(*base, "/base");
        check_keys(*base, "/base", {"power_mva", "voltage_kv", "frequency_hz"});
        for (auto it = base->begin(); it != base->end(); ++it)
            out.base[it.key()] = as_number(it.value(), "/base/" + it.key());
    }

    if (const json* params = optional_member(j, "params")) {
        const std::string at = "/params";
        as_object(*params, at);
        check_keys(*params, at, {"ac_buses", "ac_lines", "dc_buses", "dc_lines",
                                 "converters"});
        if (const json* sect = optional_member(*params, "ac_buses")) {
            as_object(*sect, at + "/ac_buses");
            for (auto it = sect->begin(); it != sect->end(); ++it) {
                const std::string bp = at + "/ac_buses/" + it.key();
                int bus = 0;
                try {
                    bus = std::stoi(it.key());
                } catch (const std::exception&) {
                    throw SchemaError(bp + ": expected a bus number key");
                }
                if (!grid.ac_buses.count(bus))
                    throw SchemaError(bp + ": bus " + it.key() + " is not an ac bus");
                const json& v = as_object(it.value(), bp);
                check_keys(v, bp, {"inertia", "damping", "injection"});
                LinearGridParams::AcBus p;
                p.inertia = as_number(member(v, bp, "inertia"), bp + "/inertia");
                p.damping = as_number(member(v, bp, "damping"), bp + "/damping");
                if (const json* inj = optional_member(v, "injection"))
                    p.injection = as_number(*inj, bp + "/injection");
                out.params.ac_bus[bus] = p;
            }
        }
        if (const json* sect = optional_member(*params, "ac_lines")) {
            as_object(*sect, at + "/ac_lines");
            for (auto it = sect->begin(); it != sect->end(); ++it) {
                const std::string lp = at + "/ac_lines/" + it.key();
                const Line line = parse_line_key(it.key(), lp);
                if (!grid.ac_lines.count(line))
                    throw SchemaError(lp + ": no such ac line");
                const json& v = as_object(it.value(), lp);
                check_keys(v, lp, {"susceptance"});
                out.params.ac_line_susceptance[line] =
                    as_number(member(v, lp, "susceptance"), lp + "/susceptance");
            }
        }
        if (const json* sect = optional_member(*params, "dc_buses")) {
            as_object(*sect, at + "/dc_buses");
            for (auto it = sect->begin(); it != sect->end(); ++it) {
                const std::string bp = at + "/dc_buses/" + it.key();
                int bus = 0;
                try {
                    bus = std::stoi(it.key());
                } catch (const std::exception&) {
                    throw SchemaError(bp + ": expected a bus number key");
                }
                if (!grid.dc_buses.count(bus))
                    throw SchemaError(bp + ": bus " + it.key() + " is not a dc bus");
                const json& v = as_object(it.value(), bp);
                check_keys(v, bp, {"capacitance"});
                out.params.dc_bus_capacitance[bus] =
                    as_number(member(v, bp, "capacitance"), bp + "/capacitance");
            }
        }
        if (const json* sect = optional_member(*params, "dc_lines")) {
            as_object(*sect, at + "/dc_lines");
            for (auto it = sect->begin(); it != sect->end(); ++it) {
                const std::string lp = at + "/dc_lines/" + it.key();
                const Line line = parse_line_key(it.key(), lp);
                if (!grid.dc_lines.count(line))
                    throw SchemaError(lp + ": no such dc line");
                const json& v = as_object(it.value(), lp);
                check_keys(v, lp, {"inductance", "resistance"});
                LinearGridParams::DcLine p;
                p.inductance = as_number(member(v, lp, "inductance"), lp + "/inductance");
                p.resistance = as_number(member(v, lp, "resistance"), lp + "/resistance");
                out.params.dc_line[line] = p;
            }
        }
        if (const json* sect = optional_member(*params, "converters")) {
            as_object(*sect, at + "/converters");
            for (auto it = sect->begin(); it != sect->end(); ++it) {
                const std::string cp = at + "/converters/" + it.key();
                const Line pair = parse_line_key(it.key(), cp);
                bool found = false;
                for (const Converter& c : grid.converters) {
                    if (make_line(c.ac_bus, c.dc_bus) == pair) {
                        found = true;
                        const json& v = as_object(it.value(), cp);
                        check_keys(v, cp, {"nominal_voltage"});
                        out.params.converter_nominal_voltage[{c.ac_bus, c.dc_bus}] =
                            as_number(member(v, cp, "nominal_voltage"),
                                      cp + "/nominal_voltage");
                        break;
                    }
                }
                if (!found) throw SchemaError(cp + ": no such converter");
            }
        }
    }

    if (const json* cost = optional_member(j, "cost")) {
        const std::string at = "/cost";
        as_object(*cost, at);
        check_keys(*cost, at, {"default_state", "default_input", "states", "inputs"});
        if (const json* v = optional_member(*cost, "default_state"))
            out.cost.default_state = as_number(*v, at + "/default_state");
        if (const json* v = optional_member(*cost, "default_input"))
            out.cost.default_input = as_number(*v, at + "/default_input");
        if (const json* states = optional_member(*cost, "states")) {
            as_object(*states, at + "/states");
            for (auto it = states->begin(); it != states->end(); ++it)
                out.cost.state_overrides[it.key()] =
                    as_number(it.value(), at + "/states/" + it.key());
        }
        if (const json* inputs = optional_member(*cost, "inputs")) {
            as_object(*inputs, at + "/inputs");
            for (auto it = inputs->begin(); it != inputs->end(); ++it)
                out.cost.input_overrides[it.key()] =
                    as_number(it.value(), at + "/inputs/" + it.key());
        }
    }

    if (const json* leader = optional_member(j, "leader")) {
        const std::string at = "/leader";
        as_object(*leader, at);
        check_keys(*leader, at, {"buses", "converters"});
        LeaderSpec spec;
        spec.buses = parse_bus_array(member(*leader, at, "buses"), at + "/buses");
        for (std::size_t i = 0; i < spec.buses.size(); ++i) {
            if (!grid.ac_buses.count(spec.buses[i]) &&
                !grid.dc_buses.count(spec.buses[i]))
                throw SchemaError(at + "/buses/" + std::to_string(i) +
                                  ": unknown bus " + std::to_string(spec.buses[i]));
        }
        const json& convs =
            as_array(member(*leader, at, "converters"), at + "/converters");
        for (std::size_t i = 0; i < convs.size(); ++i) {
            const std::string cp = at + "/converters/" + std::to_string(i);
            as_array(convs[i], cp);
            if (convs[i].size() != 2) throw SchemaError(cp + ": expected [ac, dc]");
            const int ac = as_int(convs[i][0], cp + "/0");
            const int dc = as_int(convs[i][1], cp + "/1");
            bool found = false;
            for (const Converter& c : grid.converters)
                found = found || (c.ac_bus == ac && c.dc_bus == dc);
            if (!found)
                throw SchemaError(cp + ": no converter joins " + std::to_string(ac) +
                                  " and " + std::to_string(dc));
            spec.converters.emplace_back(ac, dc);
        }
        out.leader = std::move(spec);
    }

    return out;
}

ParsedGrid load_grid(const std::string& path) { return parse_grid(read_file(path)); }

std::string serialize_grid(const ParsedGrid& parsed) {
    const GridGraph& grid = parsed.grid;
    json j;
    j["ac_buses"] = json::array();
    for (int b : grid.ac_buses) j["ac_buses"].push_back(b);
    j["dc_buses"] = json::array();
    for (int b : grid.dc_buses) j["dc_buses"].push_back(b);
    j["ac_lines"] = json::array();
    for (const Line& l : grid.ac_lines) j["ac_lines"].push_back({l.first, l.second});
    j["dc_lines"] = json::array();
    for (const Line& l : grid.dc_lines) j["dc_lines"].push_back({l.first, l.second});
    j["converters"] = json::array();
    for (const Converter& c : grid.converters) {
        json conv;
        conv["ac_bus"] = c.ac_bus;
        conv["dc_bus"] = c.dc_bus;
        if (c.orientation != Orientation::Unassigned)
            conv["orientation"] = to_string(c.orientation);
        if (!c.loops.empty()) {
            json loops = json::array();
            for (LocalLoop l : c.loops) loops.push_back(to_string(l));
            conv["loops"] = std::move(loops);
        }
        j["converters"].push_back(std::move(conv));
    }

    if (!parsed.base.empty()) j["base"] = parsed.base;

    json params;
    for (const auto& [bus, p] : parsed.params.ac_bus) {
        json v;
        v["inertia"] = p.inertia;
        v["damping"] = p.damping;
        if (p.injection != 0) v["injection"] = p.injection;
        params["ac_buses"][std::to_string(bus)] = std::move(v);
    }
    for (const auto& [line, b] : parsed.params.ac_line_susceptance) {
        params["ac_lines"][std::to_string(line.first) + "-" +
                           std::to_string(line.second)] = {{"susceptance", b}};
    }
    for (const auto& [bus, c] : parsed.params.dc_bus_capacitance)
        params["dc_buses"][std::to_string(bus)] = {{"capacitance", c}};
    for (const auto& [line, p] : parsed.params.dc_line) {
        params["dc_lines"][std::to_string(line.first) + "-" +
                           std::to_string(line.second)] = {
            {"inductance", p.inductance}, {"resistance", p.resistance}};
    }
    for (const auto& [pair, v] : parsed.params.converter_nominal_voltage) {
        params["converters"][std::to_string(pair.first) + "-" +
                             std::to_string(pair.second)] = {{"nominal_voltage", v}};
    }
    if (!params.is_null()) j["params"] = std::move(params);

    json cost;
    if (parsed.cost.default_state != 1.0) cost["default_state"] = parsed.cost.default_state;
    if (parsed.cost.default_input != 1.0) cost["default_input"] = parsed.cost.default_input;
    if (!parsed.cost.state_overrides.empty()) cost["states"] = parsed.cost.state_overrides;
    if (!parsed.cost.input_overrides.empty()) cost["inputs"] = parsed.cost.input_overrides;
    if (!cost.is_null()) j["cost"] = std::move(cost);

    if (parsed.leader) {
        json leader;
        leader["buses"] = parsed.leader->buses;
        leader["converters"] = json::array();
        for (const auto& [ac, dc] : parsed.leader->converters)
            leader["converters"].push_back({ac, dc});
        j["leader"] = std::move(leader);
    }

    return dump(j);
}

// ---------------------------------------------------------------------
// State space and controller documents
// ---------------------------------------------------------------------

std::string statespace_to_json(const StateSpace& ss) {
    json j;
    j["a"] = matrix_to_json(ss.A);
    j["b"] = matrix_to_json(ss.B);
    j["f"] = matrix_to_json(ss.F);
    j["c"] = matrix_to_json(ss.C);
    j["d"] = matrix_to_json(ss.D);
    j["drift"] = vector_to_json(ss.drift);
    json labels = json::array();
    for (const StateLabel& label : ss.state_labels) labels.push_back(label.str());
    j["state_labels"] = std::move(labels);
    j["input_labels"] = ss.input_labels;
    j["state_partition"] = ss.state_partition.sizes;
    j["input_partition"] = ss.input_partition.sizes;
    j["subgrid_order"] = ss.subgrid_order;
    return dump(j);
}

StateSpace statespace_from_json(const std::string& text) {
    const json j = parse_json_text(text);
    as_object(j, "/");
    check_keys(j, "", {"a", "b", "f", "c", "d", "drift", "state_labels",
                       "input_labels", "state_partition", "input_partition",
                       "subgrid_order"});
    StateSpace ss;
    ss.A = matrix_from_json(member(j, "", "a"), "/a");
    ss.B = matrix_from_json(member(j, "", "b"), "/b");
    ss.F = matrix_from_json(member(j, "", "f"), "/f");
    ss.C = matrix_from_json(member(j, "", "c"), "/c");
    ss.D = matrix_from_json(member(j, "", "d"), "/d");
    ss.drift = vector_from_json(member(j, "", "drift"), "/drift");
    const auto labels = strings_from_json(member(j, "", "state_labels"), "/state_labels");
    for (std::size_t i = 0; i < labels.size(); ++i)
        ss.state_labels.push_back(
            parse_state_label(labels[i], "/state_labels/" + std::to_string(i)));
    ss.input_labels = strings_from_json(member(j, "", "input_labels"), "/input_labels");
    ss.state_partition =
        BlockPartition{ints_from_json(member(j, "", "state_partition"), "/state_partition")};
    ss.input_partition =
        BlockPartition{ints_from_json(member(j, "", "input_partition"), "/input_partition")};
    ss.subgrid_order = strings_from_json(member(j, "", "subgrid_order"), "/subgrid_order");

    if (ss.B.rows() != ss.A.rows() || ss.drift.size() != ss.A.rows() ||
        static_cast<int>(ss.state_labels.size()) != ss.A.rows() ||
        static_cast<int>(ss.input_labels.size()) != ss.B.cols())
        throw SchemaError("/: inconsistent state-space dimensions");
    return ss;
}

std::string controller_to_json(const ControllerDocument& doc) {
    json j;
    j["k"] = matrix_to_json(doc.K);
    j["row_partition"] = doc.row_partition;
    j["col_partition"] = doc.col_partition;
    j["input_labels"] = doc.input_labels;
    j["state_labels"] = doc.state_labels;
    j["subgrid_order"] = doc.subgrid_order;
    j["mode"] = doc.mode;
    if (!doc.leader_subgrids.empty()) j["leader_subgrids"] = doc.leader_subgrids;
    if (!doc.leader_inputs.empty()) j["leader_inputs"] = doc.leader_inputs;
    j["h2_norm"] = doc.h2;
    j["riccati_residual"] = doc.riccati_residual;
    j["closed_loop_abscissa"] = doc.closed_loop_abscissa;
    return dump(j);
}

ControllerDocument controller_from_json(const std::string& text) {
    const json j = parse_json_text(text);
    as_object(j, "/");
    check_keys(j, "", {"k", "row_partition", "col_partition", "input_labels",
                       "state_labels", "subgrid_order", "mode", "leader_subgrids",
                       "leader_inputs", "h2_norm", "riccati_residual",
                       "closed_loop_abscissa"});
    ControllerDocument doc;
    doc.K = matrix_from_json(member(j, "", "k"), "/k");
    doc.row_partition = ints_from_json(member(j, "", "row_partition"), "/row_partition");
    doc.col_partition = ints_from_json(member(j, "", "col_partition"), "/col_partition");
    doc.input_labels = strings_from_json(member(j, "", "input_labels"), "/input_labels");
    doc.state_labels = strings_from_json(member(j, "", "state_labels"), "/state_labels");
    doc.subgrid_order = strings_from_json(member(j, "", "subgrid_order"), "/subgrid_order");
    doc.mode = as_string(member(j, "", "mode"), "/mode");
    if (const json* v = optional_member(j, "leader_subgrids"))
        doc.leader_subgrids = strings_from_json(*v, "/leader_subgrids");
    if (const json* v = optional_member(j, "leader_inputs"))
        doc.leader_inputs = strings_from_json(*v, "/leader_inputs");
    doc.h2 = as_number(member(j, "", "h2_norm"), "/h2_norm");
    doc.riccati_residual =
        as_number(member(j, "", "riccati_residual"), "/riccati_residual");
    doc.closed_loop_abscissa =
        as_number(member(j, "", "closed_loop_abscissa"), "/closed_loop_abscissa");
    if (static_cast<int>(doc.state_labels.size()) != doc.K.cols() ||
        static_cast<int>(doc.input_labels.size()) != doc.K.rows())
        throw SchemaError("/: gain dimensions do not match the labels");
    return doc;
}

GainMatrix controller_gain(const ControllerDocument& doc) {
    GainMatrix gain;
    gain.K = doc.K;
    gain.row_partition = BlockPartition{doc.row_partition};
    gain.col_partition = BlockPartition{doc.col_partition};
    return gain;
}

// ---------------------------------------------------------------------
// Traces, metrics, initial states
// ---------------------------------------------------------------------

std::string trace_to_csv(const Trace& trace) {
    std::ostringstream out;
    out << "t";
    for (const std::string& label : trace.state_labels) out << "," << label;
    for (const std::string& label : trace.input_labels) out << "," << label;
    out << "\n";
    char buffer[64];
    for (int k = 0; k < trace.steps(); ++k) {
        std::snprintf(buffer, sizeof buffer, "%.12g", trace.times[k]);
        out << buffer;
        for (int j = 0; j < trace.states.cols(); ++j) {
            std::snprintf(buffer, sizeof buffer, "%.12g", trace.states(k, j));
            out << "," << buffer;
        }
        for (int j = 0; j < trace.inputs.cols(); ++j) {
            std::snprintf(buffer, sizeof buffer, "%.12g", trace.inputs(k, j));
            out << "," << buffer;
        }
        out << "\n";
    }
    return out.str();
}

std::string metrics_to_json(const TraceMetrics& metrics) {
    json channels;
    for (std::size_t i = 0; i < metrics.labels.size(); ++i) {
        json entry;
        const double settle = metrics.channels[i].settling_time;
        if (std::isinf(settle)) entry["settling_time"] = "inf";
        else entry["settling_time"] = settle;
        entry["peak"] = metrics.channels[i].peak;
        channels[metrics.labels[i]] = std::move(entry);
    }
    json j;
    j["channels"] = std::move(channels);
    j["quadratic_cost"] = metrics.quadratic_cost;
    return dump(j);
}

Eigen::VectorXd parse_initial_state(const std::string& text, const StateSpace& ss) {
    const json j = parse_json_text(text);
    if (j.is_array()) {
        const Eigen::VectorXd x0 = vector_from_json(j, "");
        if (x0.size() != ss.n())
            throw DimensionMismatch("initial state has " + std::to_string(x0.size()) +
                                    " entries, model has " + std::to_string(ss.n()));
        return x0;
    }
    if (j.is_object()) {
        Eigen::VectorXd x0 = Eigen::VectorXd::Zero(ss.n());
        for (auto it = j.begin(); it != j.end(); ++it) {
            int index = -1;
            try {
                index = ss.state_index(it.key());
            } catch (const UnknownElement&) {
                throw SchemaError("/" + it.key() + ": no such state");
            }
            x0(index) = as_number(it.value(), "/" + it.key());
        }
        return x0;
    }
    throw SchemaError(": initial state must be an array or a label map");
}

// ---------------------------------------------------------------------
// DOT rendering
// ---------------------------------------------------------------------

namespace {

std::string bus_node(const GridGraph& grid, int bus) {
    return (grid.ac_buses.count(bus) ? "ac" : "dc") + std::to_string(bus);
}

}  // namespace

std::string to_dot_bus(const GridGraph& grid) {
    std::ostringstream out;
    out << "digraph grid {\n  rankdir=LR;\n";
    for (int b : grid.ac_buses)
        out << "  \"ac" << b << "\" [shape=circle];\n";
    for (int b : grid.dc_buses)
        out << "  \"dc" << b << "\" [shape=box];\n";
    for (const Line& l : grid.ac_lines)
        out << "  \"" << bus_node(grid, l.first) << "\" -> \"" << bus_node(grid, l.second)
            << "\" [dir=none];\n";
    for (const Line& l : grid.dc_lines)
        out << "  \"" << bus_node(grid, l.first) << "\" -> \"" << bus_node(grid, l.second)
            << "\" [dir=none, style=dashed];\n";
    for (const Converter& c : grid.converters) {
        const std::string ac = "ac" + std::to_string(c.ac_bus);
        const std::string dc = "dc" + std::to_string(c.dc_bus);
        switch (c.orientation) {
            case Orientation::AcToDc:
                out << "  \"" << ac << "\" -> \"" << dc << "\" [label=\"vsc\"];\n";
                break;
            case Orientation::DcToAc:
                out << "  \"" << dc << "\" -> \"" << ac << "\" [label=\"vsc\"];\n";
                break;
            case Orientation::Unassigned:
                out << "  \"" << ac << "\" -> \"" << dc
                    << "\" [dir=none, label=\"vsc\"];\n";
                break;
        }
    }
    out << "}\n";
    return out.str();
}

std::string to_dot_subgrid(const QuotientGraph& quotient) {
    std::ostringstream out;
    out << "digraph quotient {\n  rankdir=LR;\n";
    for (const auto& node : quotient.nodes)
        out << "  \"" << node.name << "\" [shape="
            << (node.kind == SubgridKind::Ac ? "circle" : "box") << "];\n";
    for (const auto& [a, b] : quotient.underlying_edges) {
        if (quotient.edges.count({a, b}))
            out << "  \"" << quotient.nodes[a].name << "\" -> \""
                << quotient.nodes[b].name << "\";\n";
        else if (quotient.edges.count({b, a}))
            out << "  \"" << quotient.nodes[b].name << "\" -> \""
                << quotient.nodes[a].name << "\";\n";
        else
            out << "  \"" << quotient.nodes[a].name << "\" -> \""
                << quotient.nodes[b].name << "\" [dir=none];\n";
    }
    out << "}\n";
    return out.str();
}

// ---------------------------------------------------------------------
// Manifests and files
// ---------------------------------------------------------------------

std::string manifest_to_json(const RunManifest& manifest) {
    json j;
    j["command"] = manifest.command;
    j["inputs"] = manifest.inputs;
    j["outputs"] = manifest.outputs;
    j["seed"] = manifest.seed;
    j["tolerances"] = manifest.tolerances;
    return dump(j);
}

void write_manifest(const RunManifest& manifest, const std::string& primary_output) {
    write_file(primary_output + ".manifest.json", manifest_to_json(manifest));
}

std::uint64_t fnv1a64(const std::string& bytes) {
    std::uint64_t hash = 14695981039346656037ull;
    for (unsigned char byte : bytes) {
        hash ^= byte;
        hash *= 1099511628211ull;
    }
    return hash;
}

std::string digest_hex(const std::string& bytes) {
    char buffer[32];
    std::snprintf(buffer, sizeof buffer, "fnv1a64:%016llx",
                  static_cast<unsigned long long>(fnv1a64(bytes)));
    return buffer;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read " + path);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path);
    out << content;
    if (!out) throw IoError("failed while writing " + path);
}

}  // namespace acdc
