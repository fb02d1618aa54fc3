#include "bartvs/trace_io.hpp"

#include "bartvs/data.hpp"
#include "bartvs/results_io.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>

namespace bartvs {

namespace {

static_assert(std::endian::native == std::endian::little || std::endian::native == std::endian::big);

template <typename T>
void put(std::string& buf, T v)
{
    char bytes[sizeof(T)];
    std::memcpy(bytes, &v, sizeof(T));
    if constexpr (std::endian::native == std::endian::big)
        std::reverse(bytes, bytes + sizeof(T));
    buf.append(bytes, sizeof(T));
}

class Reader {
public:
    Reader(const std::string& tag, const std::string& data) : tag_(tag), data_(data) {}

    template <typename T>
    T get()
    {
        if (pos_ + sizeof(T) > data_.size())
            throw ValidationError("trace section " + tag_ + " is truncated");
        char bytes[sizeof(T)];
        std::memcpy(bytes, data_.data() + pos_, sizeof(T));
        if constexpr (std::endian::native == std::endian::big)
            std::reverse(bytes, bytes + sizeof(T));
        pos_ += sizeof(T);
        T v;
        std::memcpy(&v, bytes, sizeof(T));
        return v;
    }

    std::string bytes(std::size_t len)
    {
        if (pos_ + len > data_.size())
            throw ValidationError("trace section " + tag_ + " is truncated");
        std::string s = data_.substr(pos_, len);
        pos_ += len;
        return s;
    }

    void finish() const
    {
        if (pos_ != data_.size())
            throw ValidationError("trace section " + tag_ + " has trailing bytes");
    }

private:
    std::string tag_;
    const std::string& data_;
    std::size_t pos_ = 0;
};

void section(std::ostream& out, const char* tag, const std::string& payload)
{
    std::string head(tag, 4);
    put<std::uint64_t>(head, payload.size());
    out.write(head.data(), static_cast<std::streamsize>(head.size()));
    out.write(payload.data(), static_cast<std::streamsize>(payload.size()));
}

} // namespace

void write_trace(std::ostream& out, const PosteriorTrace& tr)
{
    tr.validate();
    const auto K = tr.draws();
    const auto p = tr.features();
    const auto T = tr.tree_leaves.cols();

    out.write(kTraceMagic, 4);
    out.put(static_cast<char>(kTraceVersion));

    std::string b;
    put<std::uint64_t>(b, K);
    put<std::uint64_t>(b, p);
    put<std::uint64_t>(b, T);
    section(out, "HEAD", b);

    b.clear();
    for (const auto& name : tr.feature_names) {
        put<std::uint32_t>(b, static_cast<std::uint32_t>(name.size()));
        b += name;
    }
    section(out, "NAME", b);

    section(out, "CONF", to_json(tr.config).dump());

    b.clear();
    for (Eigen::Index k = 0; k < K; ++k)
        for (Eigen::Index j = 0; j < p; ++j)
            put<std::int32_t>(b, tr.counts(k, j));
    section(out, "CNTS", b);

    b.clear();
    for (Eigen::Index k = 0; k < K; ++k)
        for (Eigen::Index j = 0; j < p; ++j)
            put<std::uint8_t>(b, tr.inclusion(k, j) ? 1 : 0);
    section(out, "INCL", b);

    b.clear();
    for (Eigen::Index k = 0; k < K; ++k)
        put<double>(b, tr.sigma2_path[k]);
    section(out, "SIG2", b);

    b.clear();
    for (Eigen::Index k = 0; k < K; ++k)
        for (Eigen::Index t = 0; t < T; ++t)
            put<std::int32_t>(b, tr.tree_leaves(k, t));
    section(out, "LEAF", b);

    b.clear();
    for (Eigen::Index k = 0; k < K; ++k)
        put<double>(b, tr.mean_fit_path[k]);
    section(out, "MFIT", b);

    b.clear();
    const auto& m = tr.moves;
    for (std::int64_t v : {m.birth_proposed, m.birth_accepted, m.death_proposed, m.death_accepted,
                           m.change_proposed, m.change_accepted, m.exhausted, m.alpha_warnings})
        put<std::int64_t>(b, v);
    section(out, "MOVE", b);

    if (tr.mi_node_log) {
        b.clear();
        for (const auto& draw : *tr.mi_node_log) {
            put<std::uint32_t>(b, static_cast<std::uint32_t>(draw.size()));
            for (const auto& node : draw) {
                put<std::int32_t>(b, node.feature);
                put<double>(b, node.accept_prob);
            }
        }
        section(out, "MILG", b);
    }
    if (tr.s_path) {
        b.clear();
        for (Eigen::Index k = 0; k < tr.s_path->rows(); ++k)
            for (Eigen::Index j = 0; j < tr.s_path->cols(); ++j)
                put<double>(b, (*tr.s_path)(k, j));
        section(out, "SPTH", b);
    }
    if (tr.alpha_path) {
        b.clear();
        for (Eigen::Index k = 0; k < tr.alpha_path->size(); ++k)
            put<double>(b, (*tr.alpha_path)[k]);
        section(out, "ALPH", b);
    }
    section(out, "END!", {});
    if (!out)
        throw std::runtime_error("failed writing trace");
}

PosteriorTrace read_trace(std::istream& in)
{
    char magic[4];
    if (!in.read(magic, 4) || std::memcmp(magic, kTraceMagic, 4) != 0)
        throw ValidationError("not a trace file (bad magic)");
    const int version = in.get();
    if (version != kTraceVersion)
        throw ValidationError("unsupported trace version " + std::to_string(version));

    std::map<std::string, std::string> sections;
    for (;;) {
        char head[12];
        if (!in.read(head, 12))
            throw ValidationError("trace file is truncated (no END! section)");
        const std::string tag(head, 4);
        const std::string lenbytes(head + 4, 8);
        const auto len = Reader(tag, lenbytes).get<std::uint64_t>();
        if (tag == "END!")
            break;
        std::string payload(len, '\0');
        if (len > 0 && !in.read(payload.data(), static_cast<std::streamsize>(len)))
            throw ValidationError("trace section " + tag + " is truncated");
        sections[tag] = std::move(payload);
    }
    for (const char* required : {"HEAD", "NAME", "CONF", "CNTS", "INCL", "SIG2", "LEAF", "MFIT", "MOVE"})
        if (!sections.count(required))
            throw ValidationError(std::string("trace is missing section ") + required);

    PosteriorTrace tr;
    Reader h("HEAD", sections["HEAD"]);
    const auto K = static_cast<Eigen::Index>(h.get<std::uint64_t>());
    const auto p = static_cast<Eigen::Index>(h.get<std::uint64_t>());
    const auto T = static_cast<Eigen::Index>(h.get<std::uint64_t>());
    h.finish();

    Reader names("NAME", sections["NAME"]);
    for (Eigen::Index j = 0; j < p; ++j)
        tr.feature_names.push_back(names.bytes(names.get<std::uint32_t>()));
    names.finish();

    try {
        tr.config = fit_config_from_json(nlohmann::ordered_json::parse(sections["CONF"]));
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("trace config section: ") + e.what());
    }

    Reader c("CNTS", sections["CNTS"]);
    tr.counts.resize(K, p);
    for (Eigen::Index k = 0; k < K; ++k)
        for (Eigen::Index j = 0; j < p; ++j)
            tr.counts(k, j) = c.get<std::int32_t>();
    c.finish();

    Reader inc("INCL", sections["INCL"]);
    tr.inclusion.resize(K, p);
    for (Eigen::Index k = 0; k < K; ++k)
        for (Eigen::Index j = 0; j < p; ++j)
            tr.inclusion(k, j) = inc.get<std::uint8_t>() != 0;
    inc.finish();

    Reader s2("SIG2", sections["SIG2"]);
    tr.sigma2_path.resize(K);
    for (Eigen::Index k = 0; k < K; ++k)
        tr.sigma2_path[k] = s2.get<double>();
    s2.finish();

    Reader lf("LEAF", sections["LEAF"]);
    tr.tree_leaves.resize(K, T);
    for (Eigen::Index k = 0; k < K; ++k)
        for (Eigen::Index t = 0; t < T; ++t)
            tr.tree_leaves(k, t) = lf.get<std::int32_t>();
    lf.finish();

    Reader mf("MFIT", sections["MFIT"]);
    tr.mean_fit_path.resize(K);
    for (Eigen::Index k = 0; k < K; ++k)
        tr.mean_fit_path[k] = mf.get<double>();
    mf.finish();

    Reader mv("MOVE", sections["MOVE"]);
    auto& m = tr.moves;
    for (std::int64_t* v : {&m.birth_proposed, &m.birth_accepted, &m.death_proposed, &m.death_accepted,
                            &m.change_proposed, &m.change_accepted, &m.exhausted, &m.alpha_warnings})
        *v = mv.get<std::int64_t>();
    mv.finish();

    if (sections.count("MILG")) {
        Reader mi("MILG", sections["MILG"]);
        std::vector<std::vector<MiNode>> log(K);
        for (auto& draw : log) {
            draw.resize(mi.get<std::uint32_t>());
            for (auto& node : draw) {
                node.feature = mi.get<std::int32_t>();
                node.accept_prob = mi.get<double>();
            }
        }
        mi.finish();
        tr.mi_node_log = std::move(log);
    }
    if (sections.count("SPTH")) {
        Reader sp("SPTH", sections["SPTH"]);
        Eigen::MatrixXd s(K, p);
        for (Eigen::Index k = 0; k < K; ++k)
            for (Eigen::Index j = 0; j < p; ++j)
                s(k, j) = sp.get<double>();
        sp.finish();
        tr.s_path = std::move(s);
    }
    if (sections.count("ALPH")) {
        Reader al("ALPH", sections["ALPH"]);
        Eigen::VectorXd a(K);
        for (Eigen::Index k = 0; k < K; ++k)
            a[k] = al.get<double>();
        al.finish();
        tr.alpha_path = std::move(a);
    }
    tr.validate();
    return tr;
}

void save_trace(const std::string& path, const PosteriorTrace& trace)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw std::runtime_error("cannot write " + path);
    write_trace(out, trace);
}

PosteriorTrace load_trace(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw std::runtime_error("cannot open " + path);
    return read_trace(in);
}

} // namespace bartvs
