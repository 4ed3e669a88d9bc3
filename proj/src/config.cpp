#include "fractal/config.hpp"

#include <fstream>
#include <iomanip>
#include <ostream>
#include <set>

namespace fractal {

using nlohmann::json;

namespace {

Rational rational_value(const json& j, const std::string& what) {
    if (j.is_string()) return parse_rational(j.get<std::string>());
    if (j.is_number_integer()) return Rational(j.get<long long>());
    throw ConfigError(what + ": expected a rational string such as \"1/3\" or an integer");
}

std::vector<Rational> rational_list(const json& doc, const char* key) {
    if (!doc.contains(key) || !doc[key].is_array()) throw ConfigError(std::string("missing list '") + key + "'");
    std::vector<Rational> out;
    for (const auto& item : doc[key]) out.push_back(rational_value(item, key));
    return out;
}

int label_of(const SelfSimilarStructure& s, const json& j) {
    if (!j.is_string()) throw ConfigError("boundary labels must be strings");
    return s.label_index(j.get<std::string>());
}

CellAddress address_of(const SelfSimilarStructure& s, const json& j) {
    if (!j.is_array() || j.size() != 2 || !j[0].is_number_integer())
        throw ConfigError("gluing entries must look like [[i,\"u\"],[j,\"w\"]]");
    return CellAddress{j[0].get<int>() - 1, label_of(s, j[1])};
}

std::string class_name(EdgeClass c) { return to_string(c); }

}  // namespace

StructureConfig parse_config(const json& doc) {
    if (!doc.is_object()) throw ConfigError("config must be a JSON object");
    StructureConfig cfg;
    auto& s = cfg.structure;
    if (!doc.contains("n_cells") || !doc["n_cells"].is_number_integer()) throw ConfigError("missing integer 'n_cells'");
    s.n_cells = doc["n_cells"].get<int>();
    if (!doc.contains("boundary") || !doc["boundary"].is_array()) throw ConfigError("missing list 'boundary'");
    for (const auto& b : doc["boundary"]) {
        if (!b.is_string()) throw ConfigError("boundary labels must be strings");
        s.boundary.push_back(b.get<std::string>());
    }
    if (std::set<std::string>(s.boundary.begin(), s.boundary.end()).size() != s.boundary.size())
        throw ConfigError("boundary labels must be distinct");
    if (doc.contains("gluing")) {
        for (const auto& g : doc["gluing"]) {
            if (!g.is_array() || g.size() != 2) throw ConfigError("gluing entries must be pairs");
            s.gluing.push_back(Gluing{address_of(s, g[0]), address_of(s, g[1])});
        }
    }
    s.resistance = rational_list(doc, "resistance");
    s.theta = rational_list(doc, "theta");
    if (doc.contains("fixed")) {
        for (const auto& c : doc["fixed"]) {
            if (!c.is_number_integer()) throw ConfigError("'fixed' entries must be 1-based cell indices");
            s.fixed_cell.push_back(c.get<int>() - 1);
        }
    }
    if (doc.contains("boundary_mass")) s.boundary_mass = rational_list(doc, "boundary_mass");
    s.validate();

    if (doc.contains("family")) {
        const json& f = doc["family"];
        std::set<std::pair<int, int>> vee;
        if (!f.contains("vee") || !f["vee"].is_array()) throw ConfigError("family block needs a 'vee' edge list");
        for (const auto& e : f["vee"]) {
            if (!e.is_array() || e.size() != 2) throw ConfigError("family 'vee' entries must be label pairs");
            vee.insert(std::minmax(label_of(s, e[0]), label_of(s, e[1])));
        }
        std::vector<TemplateEdge> edges;
        if (f.contains("edges")) {
            for (const auto& e : f["edges"]) {
                if (!e.is_array() || e.size() != 3) throw ConfigError("family 'edges' entries must be [u, w, 1 or \"v\"]");
                const int u = label_of(s, e[0]), w = label_of(s, e[1]);
                EdgeClass cls;
                if (e[2].is_string() && e[2].get<std::string>() == "v") cls = EdgeClass::vee;
                else if ((e[2].is_number_integer() && e[2].get<long long>() == 1) ||
                         (e[2].is_string() && e[2].get<std::string>() == "1"))
                    cls = EdgeClass::one;
                else throw ConfigError("template conductances must be 1 or \"v\"");
                if (cls == EdgeClass::vee && !vee.count(std::minmax(u, w)))
                    throw ConfigError("template edge marked \"v\" is missing from the 'vee' list");
                if (cls == EdgeClass::one && vee.count(std::minmax(u, w)))
                    throw ConfigError("edge listed in 'vee' has template conductance 1");
                edges.push_back({u, w, cls});
            }
        } else {
            for (int u = 0; u < s.b(); ++u)
                for (int w = u + 1; w < s.b(); ++w)
                    edges.push_back({u, w, vee.count({u, w}) ? EdgeClass::vee : EdgeClass::one});
        }
        for (const auto& [u, w] : vee) {
            bool listed = false;
            for (const auto& e : edges) listed = listed || (std::pair<int, int>(std::minmax(e.u, e.w)) == std::pair{u, w});
            if (!listed) throw ConfigError("'vee' edge is not part of the template");
        }
        cfg.family = OneParamFamily(s, std::move(edges));
    }

    if (doc.contains("form")) {
        ConductanceNetwork<Rational> net(s.b());
        for (const auto& e : doc["form"]) {
            if (!e.is_array() || e.size() != 3) throw ConfigError("form entries must be [u, w, conductance]");
            const int u = label_of(s, e[0]), w = label_of(s, e[1]);
            if (u == w) throw ConfigError("form edges must join distinct labels");
            const Rational c = rational_value(e[2], "form");
            if (c < 0) throw ConfigError("form conductances must be non-negative");
            net.set(u, w, c);
        }
        cfg.form = std::move(net);
    }
    return cfg;
}

StructureConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config '" + path + "'");
    json doc;
    try {
        in >> doc;
    } catch (const json::parse_error& e) {
        throw ConfigError("malformed JSON in '" + path + "': " + e.what());
    }
    return parse_config(doc);
}

json structure_to_json(const SelfSimilarStructure& s, const std::optional<ConductanceNetwork<Rational>>& form) {
    json doc;
    doc["n_cells"] = s.n_cells;
    doc["boundary"] = s.boundary;
    json gluing = json::array();
    for (const auto& g : s.gluing)
        gluing.push_back({{g.first.cell + 1, s.boundary[static_cast<std::size_t>(g.first.label)]},
                          {g.second.cell + 1, s.boundary[static_cast<std::size_t>(g.second.label)]}});
    doc["gluing"] = gluing;
    auto strings = [](const std::vector<Rational>& v) {
        json out = json::array();
        for (const auto& q : v) out.push_back(to_string(q));
        return out;
    };
    doc["resistance"] = strings(s.resistance);
    doc["theta"] = strings(s.theta);
    json fixed = json::array();
    for (int c : s.fixed_cell) fixed.push_back(c + 1);
    doc["fixed"] = fixed;
    doc["boundary_mass"] = strings(s.boundary_mass);
    if (form) {
        json edges = json::array();
        for (const auto& [u, w] : form->edges())
            edges.push_back({s.boundary[static_cast<std::size_t>(u)], s.boundary[static_cast<std::size_t>(w)],
                             to_string(form->conductance(u, w))});
        doc["form"] = edges;
    }
    return doc;
}

template <class Scalar>
void write_network_csv(std::ostream& out, const ConductanceNetwork<Scalar>& net) {
    out << kCsvHeader << "\n" << "x,y,conductance,class\n";
    if constexpr (!is_exact_v<Scalar>) out << std::setprecision(17);
    for (const auto& [x, y] : net.edges()) {
        out << x << "," << y << ",";
        if constexpr (is_exact_v<Scalar>) out << to_string(net.conductance(x, y));
        else out << net.conductance(x, y);
        out << "," << class_name(net.edge_class(x, y)) << "\n";
    }
}

template void write_network_csv<double>(std::ostream&, const ConductanceNetwork<double>&);
template void write_network_csv<Rational>(std::ostream&, const ConductanceNetwork<Rational>&);

void write_spectrum_csv(std::ostream& out, const Vector<double>& eigenvalues) {
    out << kCsvHeader << "\n" << "index,eigenvalue\n" << std::setprecision(17);
    for (Eigen::Index i = 0; i < eigenvalues.size(); ++i) out << i << "," << eigenvalues(i) << "\n";
}

}  // namespace fractal
