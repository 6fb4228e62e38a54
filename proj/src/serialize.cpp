#include "emq/serialize.hpp"

#include "emq/error.hpp"

namespace emq {

using nlohmann::json;

namespace {

json encode_entries(const Matrix& m)
{
    json data = json::array();
    for (Index r = 0; r < m.rows(); ++r) {
        for (Index c = 0; c < m.cols(); ++c) {
            data.push_back({m(r, c).real(), m(r, c).imag()});
        }
    }
    return data;
}

Matrix decode_entries(const json& j, Index rows, Index cols)
{
    const auto& data = j.at("data");
    if (!data.is_array() || static_cast<Index>(data.size()) != rows * cols) {
        throw InvalidArgument("state JSON: 'data' has the wrong number of entries");
    }
    Matrix m(rows, cols);
    for (Index r = 0; r < rows; ++r) {
        for (Index c = 0; c < cols; ++c) {
            const auto& e = data[static_cast<std::size_t>(r * cols + c)];
            m(r, c) = Complex(e.at(0).get<double>(), e.at(1).get<double>());
        }
    }
    return m;
}

void check_header(const json& j, const char* kind)
{
    if (j.value("schema", std::string{}) != kStateSchema) {
        throw InvalidArgument("state JSON: unsupported schema");
    }
    if (j.value("kind", std::string{}) != kind) {
        throw InvalidArgument(std::string("state JSON: expected kind '") + kind + "'");
    }
}

json header(const SpaceLayout& layout, const char* kind)
{
    return json{{"schema", kStateSchema}, {"kind", kind}, {"layout", to_json(layout)}};
}

}  // namespace

json to_json(const SpaceLayout& layout)
{
    json out = json::array();
    for (const auto& s : layout.subsystems()) {
        out.push_back({{"label", s.label},
                       {"dim", s.dim},
                       {"kind", s.kind == SubsystemKind::bosonic ? "bosonic" : "spin-half"}});
    }
    return out;
}

SpaceLayout layout_from_json(const json& j)
{
    std::vector<Subsystem> subs;
    for (const auto& e : j) {
        const auto kind = e.at("kind").get<std::string>();
        if (kind != "bosonic" && kind != "spin-half") {
            throw InvalidArgument("state JSON: unknown subsystem kind '" + kind + "'");
        }
        subs.push_back(Subsystem{e.at("label").get<std::string>(), e.at("dim").get<Index>(),
                                 kind == "bosonic" ? SubsystemKind::bosonic : SubsystemKind::spin_half});
    }
    return SpaceLayout(std::move(subs));
}

json to_json(const FockOperator& op)
{
    auto j = header(op.layout(), "operator");
    j["hermitian"] = op.tagged_hermitian();
    j["rows"] = op.dim();
    j["cols"] = op.dim();
    j["data"] = encode_entries(op.matrix());
    return j;
}

json to_json(const DensityMatrix& rho)
{
    auto j = header(rho.layout(), "density_matrix");
    j["rows"] = rho.dim();
    j["cols"] = rho.dim();
    j["data"] = encode_entries(rho.matrix());
    return j;
}

json to_json(const StateVector& psi)
{
    auto j = header(psi.layout(), "state_vector");
    j["rows"] = psi.dim();
    j["cols"] = 1;
    j["data"] = encode_entries(psi.amplitudes());
    return j;
}

FockOperator operator_from_json(const json& j)
{
    check_header(j, "operator");
    auto layout = layout_from_json(j.at("layout"));
    const Index n = layout.total_dim();
    Matrix m = decode_entries(j, n, n);
    if (j.value("hermitian", false)) return FockOperator::hermitian(std::move(layout), std::move(m));
    return FockOperator(std::move(layout), std::move(m));
}

DensityMatrix density_from_json(const json& j)
{
    check_header(j, "density_matrix");
    auto layout = layout_from_json(j.at("layout"));
    const Index n = layout.total_dim();
    return DensityMatrix(std::move(layout), decode_entries(j, n, n));
}

StateVector state_from_json(const json& j)
{
    check_header(j, "state_vector");
    auto layout = layout_from_json(j.at("layout"));
    const Index n = layout.total_dim();
    Vector v = decode_entries(j, n, 1).col(0);
    return StateVector(std::move(layout), std::move(v));
}

}  // namespace emq
