#include "ifutsvm/serialize.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>

namespace ifutsvm {

namespace {

constexpr char magic[8] = {'I', 'F', 'U', 'T', 'S', 'V', 'M', '\x01'};
constexpr std::uint32_t flag_rkhs = 1;
constexpr std::uint32_t flag_uniform = 2;
const double unset = std::numeric_limits<double>::quiet_NaN();

template <typename U>
void put_uint(std::ostream& out, U v) {
    unsigned char buf[sizeof(U)];
    for (std::size_t i = 0; i < sizeof(U); ++i) buf[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xffu);
    out.write(reinterpret_cast<const char*>(buf), sizeof buf);
}

template <typename U>
U get_uint(std::istream& in) {
    unsigned char buf[sizeof(U)];
    if (!in.read(reinterpret_cast<char*>(buf), sizeof buf)) throw ParseError("model file truncated");
    U v = 0;
    for (std::size_t i = 0; i < sizeof(U); ++i) v |= static_cast<U>(buf[i]) << (8 * i);
    return v;
}

void put_f64(std::ostream& out, double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, sizeof bits);
    put_uint(out, bits);
}

double get_f64(std::istream& in) {
    const auto bits = get_uint<std::uint64_t>(in);
    double v;
    std::memcpy(&v, &bits, sizeof v);
    return v;
}

std::optional<double> opt(double v) {
    if (std::isnan(v)) return std::nullopt;
    return v;
}

nlohmann::json opt_json(const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); }

std::optional<double> opt_from(const nlohmann::json& j, const char* key) {
    if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
    return j.at(key).get<double>();
}

std::vector<double> as_vector(const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

Vector from_vector(const std::vector<double>& v) {
    return Eigen::Map<const Vector>(v.data(), static_cast<Index>(v.size()));
}

}  // namespace

void write_model(std::ostream& out, const TwinModel& model) {
    const auto& hp = model.hyperparams();
    const auto len = static_cast<std::uint64_t>(model.plane1().w.size());
    out.write(magic, sizeof magic);
    put_uint<std::uint32_t>(out, model.kind() == ModelKind::utsvm ? 0u : 1u);
    put_uint<std::uint32_t>(out, model.is_kernel() ? 1u : 0u);
    put_uint<std::uint64_t>(out, static_cast<std::uint64_t>(model.features()));
    put_uint<std::uint64_t>(out, static_cast<std::uint64_t>(model.reference().rows()));
    put_uint<std::uint64_t>(out, len);
    for (double v : {hp.c1, hp.c2, hp.c3, hp.c4, hp.cu, hp.epsilon}) put_f64(out, v);
    put_f64(out, hp.kernel ? hp.kernel->width : 0.0);
    put_f64(out, hp.delta.value_or(unset));
    put_f64(out, hp.fuzzy.eta.value_or(unset));
    put_f64(out, hp.fuzzy.rho.value_or(unset));
    put_f64(out, hp.solver.tol);
    put_uint<std::uint64_t>(out, static_cast<std::uint64_t>(hp.solver.max_iter));
    std::uint32_t flags = 0;
    if (hp.rkhs_norm) flags |= flag_rkhs;
    if (hp.weighting == ScoreWeighting::uniform) flags |= flag_uniform;
    put_uint(out, flags);
    put_uint<std::uint64_t>(out, hp.seed);
    for (const Plane* p : {&model.plane1(), &model.plane2()}) {
        for (Index i = 0; i < p->w.size(); ++i) put_f64(out, p->w(i));
        put_f64(out, p->b);
    }
    const Matrix& d = model.reference();
    for (Index i = 0; i < d.rows(); ++i)
        for (Index j = 0; j < d.cols(); ++j) put_f64(out, d(i, j));
    if (!out) throw ConfigError("failed to write model");
}

TwinModel read_model(std::istream& in) {
    char head[sizeof magic];
    if (!in.read(head, sizeof head) || std::memcmp(head, magic, sizeof magic) != 0)
        throw ParseError("not a binary model file (bad magic)");
    const auto kind = get_uint<std::uint32_t>(in);
    const auto mode = get_uint<std::uint32_t>(in);
    if (kind > 1 || mode > 1) throw ParseError("model header has an unknown kind or mode");
    const auto n = get_uint<std::uint64_t>(in);
    const auto m = get_uint<std::uint64_t>(in);
    const auto len = get_uint<std::uint64_t>(in);
    constexpr std::uint64_t limit = 1ull << 32;
    if (n == 0 || n > limit || m > limit || len > limit || (mode == 0 && m != 0))
        throw ParseError("model header has implausible sizes");

    Hyperparams hp;
    hp.c1 = get_f64(in);
    hp.c2 = get_f64(in);
    hp.c3 = get_f64(in);
    hp.c4 = get_f64(in);
    hp.cu = get_f64(in);
    hp.epsilon = get_f64(in);
    const double width = get_f64(in);
    if (mode == 1) hp.kernel = KernelSpec(width);
    hp.delta = opt(get_f64(in));
    hp.fuzzy.eta = opt(get_f64(in));
    hp.fuzzy.rho = opt(get_f64(in));
    hp.solver.tol = get_f64(in);
    hp.solver.max_iter = static_cast<long>(get_uint<std::uint64_t>(in));
    const auto flags = get_uint<std::uint32_t>(in);
    hp.rkhs_norm = (flags & flag_rkhs) != 0;
    hp.weighting = (flags & flag_uniform) != 0 ? ScoreWeighting::uniform : ScoreWeighting::intuitionistic;
    hp.seed = get_uint<std::uint64_t>(in);

    Plane planes[2];
    for (auto& p : planes) {
        p.w.resize(static_cast<Index>(len));
        for (Index i = 0; i < p.w.size(); ++i) p.w(i) = get_f64(in);
        p.b = get_f64(in);
    }
    Matrix d(static_cast<Index>(m), static_cast<Index>(mode == 1 ? n : 0));
    if (mode == 0) d.resize(0, 0);
    for (Index i = 0; i < d.rows(); ++i)
        for (Index j = 0; j < d.cols(); ++j) d(i, j) = get_f64(in);
    return TwinModel(kind == 0 ? ModelKind::utsvm : ModelKind::ifutsvm_id, std::move(hp), static_cast<Index>(n),
                     std::move(planes[0]), std::move(planes[1]), std::move(d));
}

nlohmann::json hyperparams_to_json(const Hyperparams& hp) {
    return nlohmann::json{
        {"c1", hp.c1},
        {"c2", hp.c2},
        {"c3", hp.c3},
        {"c4", hp.c4},
        {"cu", hp.cu},
        {"epsilon", hp.epsilon},
        {"kernel_width", hp.kernel ? nlohmann::json(hp.kernel->width) : nlohmann::json(nullptr)},
        {"delta", opt_json(hp.delta)},
        {"eta", opt_json(hp.fuzzy.eta)},
        {"rho", opt_json(hp.fuzzy.rho)},
        {"tol", hp.solver.tol},
        {"max_iter", hp.solver.max_iter},
        {"rkhs_norm", hp.rkhs_norm},
        {"weighting", hp.weighting == ScoreWeighting::uniform ? "uniform" : "intuitionistic"},
        {"seed", hp.seed},
    };
}

nlohmann::json model_to_json(const TwinModel& model) {
    nlohmann::json j;
    j["format"] = "ifutsvm-model";
    j["version"] = 1;
    j["kind"] = to_string(model.kind());
    j["mode"] = model.is_kernel() ? "kernel" : "linear";
    j["n"] = model.features();
    j["m"] = model.reference().rows();
    j["hyperparams"] = hyperparams_to_json(model.hyperparams());
    j["plane1"] = {{"w", as_vector(model.plane1().w)}, {"b", model.plane1().b}};
    j["plane2"] = {{"w", as_vector(model.plane2().w)}, {"b", model.plane2().b}};
    auto rows = nlohmann::json::array();
    const Matrix& d = model.reference();
    for (Index i = 0; i < d.rows(); ++i) rows.push_back(as_vector(d.row(i).transpose()));
    j["reference"] = rows;
    return j;
}

TwinModel model_from_json(const nlohmann::json& j) {
    try {
        if (j.at("format") != "ifutsvm-model") throw ParseError("not a model JSON document");
        const auto& h = j.at("hyperparams");
        Hyperparams hp;
        hp.c1 = h.at("c1").get<double>();
        hp.c2 = h.at("c2").get<double>();
        hp.c3 = h.at("c3").get<double>();
        hp.c4 = h.at("c4").get<double>();
        hp.cu = h.at("cu").get<double>();
        hp.epsilon = h.at("epsilon").get<double>();
        if (auto w = opt_from(h, "kernel_width")) hp.kernel = KernelSpec(*w);
        hp.delta = opt_from(h, "delta");
        hp.fuzzy.eta = opt_from(h, "eta");
        hp.fuzzy.rho = opt_from(h, "rho");
        hp.solver.tol = h.at("tol").get<double>();
        hp.solver.max_iter = h.at("max_iter").get<long>();
        hp.rkhs_norm = h.at("rkhs_norm").get<bool>();
        hp.weighting = h.at("weighting") == "uniform" ? ScoreWeighting::uniform : ScoreWeighting::intuitionistic;
        hp.seed = h.at("seed").get<std::uint64_t>();
        const bool kernel = j.at("mode") == "kernel";
        if (kernel != hp.kernel.has_value()) throw ParseError("model mode disagrees with kernel_width");
        const auto n = j.at("n").get<Index>();
        Plane p1{from_vector(j.at("plane1").at("w").get<std::vector<double>>()), j.at("plane1").at("b").get<double>()};
        Plane p2{from_vector(j.at("plane2").at("w").get<std::vector<double>>()), j.at("plane2").at("b").get<double>()};
        const auto& rows = j.at("reference");
        Matrix d(static_cast<Index>(rows.size()), kernel ? n : 0);
        for (std::size_t i = 0; i < rows.size(); ++i) {
            const auto r = rows[i].get<std::vector<double>>();
            if (static_cast<Index>(r.size()) != n) throw ParseError("reference row has the wrong length");
            d.row(static_cast<Index>(i)) = from_vector(r).transpose();
        }
        return TwinModel(parse_model_kind(j.at("kind").get<std::string>()), std::move(hp), n, std::move(p1),
                         std::move(p2), std::move(d));
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("model JSON: ") + e.what());
    }
}

void save_model(const std::string& path, const TwinModel& model) {
    const bool json = path.size() >= 5 && path.compare(path.size() - 5, 5, ".json") == 0;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write model file '" + path + "'");
    if (json) out << model_to_json(model).dump(1) << '\n';
    else write_model(out, model);
}

TwinModel load_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open model file '" + path + "'");
    char head[sizeof magic] = {};
    in.read(head, sizeof head);
    in.clear();
    in.seekg(0);
    if (std::memcmp(head, magic, sizeof magic) == 0) return read_model(in);
    try {
        return model_from_json(nlohmann::json::parse(in));
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(std::string("model file is neither binary nor JSON: ") + e.what());
    }
}

}  // namespace ifutsvm
