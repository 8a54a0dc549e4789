#include "dn/data.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>

#include "dn/rng.hpp"

namespace dn {

SequenceDataset gen_synthetic(std::size_t n_classes, std::size_t n_x, std::size_t len,
                              double smoothness, double noise, std::size_t count,
                              std::uint64_t seed, const std::optional<QFormat>& q) {
    check(n_classes >= 1, "gen_synthetic: need at least one class");
    check(n_x >= 1, "gen_synthetic: n_x must be >= 1");
    check(smoothness >= 0.0 && smoothness < 1.0, "gen_synthetic: smoothness outside [0,1)");
    check(noise >= 0.0, "gen_synthetic: noise must be >= 0");

    Rng rng(seed);

    // Class prototypes: two low-frequency sinusoids per feature. Every
    // class shares a per-feature base tone and differs from the others by
    // small frequency and phase offsets, so the classes overlap heavily in
    // their means and must be told apart by temporal detail. Tone
    // parameters depend only on (class, feature), never on the dataset
    // seed, so held-out sets drawn with a disjoint seed share the same
    // classes and differ only in their noise.
    struct Tone {
        double f1, p1, f2, p2;
    };
    std::vector<Tone> tones(n_classes * n_x);
    for (std::size_t k = 0; k < n_classes; ++k)
        for (std::size_t i = 0; i < n_x; ++i) {
            Rng base(0x62617365u + i);
            Tone& t = tones[k * n_x + i];
            t.f1 = base.uniform(0.5, 2.0);
            t.p1 = base.uniform(0.0, 2.0 * std::numbers::pi);
            t.f2 = base.uniform(1.0, 3.0);
            t.p2 = base.uniform(0.0, 2.0 * std::numbers::pi);
            Rng cls(0x746f6e65u + (static_cast<std::uint64_t>(k) << 32) + i);
            t.f1 += cls.uniform(-0.15, 0.15);
            t.p1 += cls.uniform(-0.5, 0.5);
            t.f2 += cls.uniform(-0.25, 0.25);
            t.p2 += cls.uniform(-0.7, 0.7);
        }
    auto proto = [&](std::size_t cls, std::size_t i, std::size_t t) {
        const Tone& tn = tones[cls * n_x + i];
        const double phase = 2.0 * std::numbers::pi * static_cast<double>(t) /
                             static_cast<double>(len);
        return 0.7 * std::sin(tn.f1 * phase + tn.p1) + 0.4 * std::sin(tn.f2 * phase + tn.p2);
    };

    const double innovation = std::sqrt(1.0 - smoothness * smoothness) * noise;
    const double clip = q ? q->max_value() : 0.0;

    SequenceDataset ds;
    ds.n_classes = n_classes;
    ds.n_x = n_x;
    ds.smoothness = smoothness;
    ds.noise = noise;
    ds.seed = seed;
    ds.sequences.reserve(count);
    Vector ar(n_x);
    for (std::size_t s = 0; s < count; ++s) {
        const std::size_t cls = s % n_classes;
        Sequence seq;
        seq.label = static_cast<int>(cls);
        seq.features = Matrix(len, n_x);
        for (std::size_t i = 0; i < n_x; ++i) ar[i] = noise * rng.gaussian();
        for (std::size_t t = 0; t < len; ++t) {
            for (std::size_t i = 0; i < n_x; ++i) {
                if (t > 0) ar[i] = smoothness * ar[i] + innovation * rng.gaussian();
                double v = proto(cls, i, t) + ar[i];
                if (q) v = std::clamp(v, -clip, clip);
                seq.features(t, i) = v;
            }
        }
        ds.sequences.push_back(std::move(seq));
    }
    return ds;
}

std::vector<Vector> to_steps(const Matrix& features) {
    std::vector<Vector> xs(features.rows(), Vector(features.cols()));
    for (std::size_t t = 0; t < features.rows(); ++t)
        for (std::size_t i = 0; i < features.cols(); ++i) xs[t][i] = features(t, i);
    return xs;
}

namespace {

constexpr const char* kModelMagic = "deltanet-model";
constexpr const char* kDataMagic = "deltanet-data";
constexpr const char* kVersion = "v1";

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void write_values(std::ostream& out, const Scalar* vals, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
        if (i) out << ' ';
        out << fmt(vals[i]);
    }
    out << '\n';
}

void write_matrix(std::ostream& out, const char* name, const Matrix& m) {
    out << "matrix " << name << ' ' << m.rows() << ' ' << m.cols() << '\n';
    for (std::size_t r = 0; r < m.rows(); ++r) write_values(out, m.data() + r * m.cols(), m.cols());
}

void write_vector(std::ostream& out, const char* name, const Vector& v) {
    out << "vector " << name << ' ' << v.size() << '\n';
    write_values(out, v.data(), v.size());
}

// Line reader that remembers positions for error messages.
class Reader {
public:
    Reader(const std::string& path) : path_(path), in_(path) {
        if (!in_) throw ParseError(path + ": cannot open file");
    }

    // Next non-empty line; throws if the file ends.
    std::istringstream line(const char* what) {
        std::string s;
        while (std::getline(in_, s)) {
            ++lineno_;
            if (s.find_first_not_of(" \t\r") != std::string::npos) return std::istringstream(s);
        }
        fail(std::string("unexpected end of file, expected ") + what);
    }

    [[noreturn]] void fail(const std::string& msg) const {
        throw ParseError(path_ + ":" + std::to_string(lineno_) + ": " + msg);
    }

    template <typename T>
    T token(std::istringstream& ls, const char* what) {
        T v;
        if (!(ls >> v)) fail(std::string("expected ") + what);
        return v;
    }

    void keyword(std::istringstream& ls, const std::string& want) {
        std::string got = token<std::string>(ls, want.c_str());
        if (got != want) fail("expected '" + want + "', got '" + got + "'");
    }

    void read_row(Scalar* dst, std::size_t n) {
        std::istringstream ls = line("a row of values");
        for (std::size_t i = 0; i < n; ++i)
            if (!(ls >> dst[i]))
                fail("expected " + std::to_string(n) + " values, got " + std::to_string(i));
        double extra;
        if (ls >> extra) fail("expected " + std::to_string(n) + " values, got more");
    }

private:
    std::string path_;
    std::ifstream in_;
    std::size_t lineno_ = 0;
};

void open_out(std::ofstream& out, const std::string& path) {
    out.open(path);
    if (!out) throw std::runtime_error(path + ": cannot open for writing");
}

} // namespace

void save_dataset(const std::string& path, const SequenceDataset& ds) {
    std::ofstream out;
    open_out(out, path);
    out << kDataMagic << ' ' << kVersion << '\n';
    out << "classes " << ds.n_classes << '\n';
    out << "nx " << ds.n_x << '\n';
    out << "count " << ds.sequences.size() << '\n';
    out << "gen smoothness " << fmt(ds.smoothness) << " noise " << fmt(ds.noise)
        << " seed " << ds.seed << '\n';
    for (std::size_t s = 0; s < ds.sequences.size(); ++s) {
        const Sequence& seq = ds.sequences[s];
        out << "seq " << s << " label " << seq.label << " len " << seq.features.rows()
            << '\n';
        for (std::size_t t = 0; t < seq.features.rows(); ++t)
            write_values(out, seq.features.data() + t * seq.features.cols(),
                         seq.features.cols());
    }
    out << "end\n";
    if (!out) throw std::runtime_error(path + ": write failed");
}

SequenceDataset load_dataset(const std::string& path) {
    Reader r(path);
    SequenceDataset ds;
    {
        std::istringstream ls = r.line("header");
        r.keyword(ls, kDataMagic);
        r.keyword(ls, kVersion);
    }
    {
        std::istringstream ls = r.line("classes");
        r.keyword(ls, "classes");
        ds.n_classes = r.token<std::size_t>(ls, "class count");
    }
    {
        std::istringstream ls = r.line("nx");
        r.keyword(ls, "nx");
        ds.n_x = r.token<std::size_t>(ls, "input size");
    }
    std::size_t count;
    {
        std::istringstream ls = r.line("count");
        r.keyword(ls, "count");
        count = r.token<std::size_t>(ls, "sequence count");
    }
    {
        std::istringstream ls = r.line("gen");
        r.keyword(ls, "gen");
        r.keyword(ls, "smoothness");
        ds.smoothness = r.token<double>(ls, "smoothness");
        r.keyword(ls, "noise");
        ds.noise = r.token<double>(ls, "noise");
        r.keyword(ls, "seed");
        ds.seed = r.token<std::uint64_t>(ls, "seed");
    }
    ds.sequences.reserve(count);
    for (std::size_t s = 0; s < count; ++s) {
        std::istringstream ls = r.line("seq");
        r.keyword(ls, "seq");
        const std::size_t idx = r.token<std::size_t>(ls, "sequence index");
        if (idx != s) r.fail("sequence index out of order");
        r.keyword(ls, "label");
        Sequence seq;
        seq.label = r.token<int>(ls, "label");
        if (seq.label < 0 || static_cast<std::size_t>(seq.label) >= ds.n_classes)
            throw ValidationError(path + ": seq " + std::to_string(s) +
                                  ": label outside [0, n_classes)");
        r.keyword(ls, "len");
        const std::size_t len = r.token<std::size_t>(ls, "length");
        seq.features = Matrix(len, ds.n_x);
        for (std::size_t t = 0; t < len; ++t)
            r.read_row(seq.features.data() + t * ds.n_x, ds.n_x);
        ds.sequences.push_back(std::move(seq));
    }
    {
        std::istringstream ls = r.line("end");
        r.keyword(ls, "end");
    }
    return ds;
}

void save_model(const std::string& path, const GruModel& m) {
    m.gru.validate();
    std::ofstream out;
    open_out(out, path);
    out << kModelMagic << ' ' << kVersion << '\n';
    out << "nx " << m.gru.input_size() << '\n';
    out << "nh " << m.gru.hidden_size() << '\n';
    out << "classes " << m.n_classes() << '\n';
    if (m.qformat)
        out << "q " << m.qformat->int_bits << ' ' << m.qformat->frac_bits << '\n';
    else
        out << "q none\n";
    out << "theta " << fmt(m.theta) << '\n';
    write_matrix(out, "W_xr", m.gru.w_xr);
    write_matrix(out, "W_xu", m.gru.w_xu);
    write_matrix(out, "W_xc", m.gru.w_xc);
    write_matrix(out, "W_hr", m.gru.w_hr);
    write_matrix(out, "W_hu", m.gru.w_hu);
    write_matrix(out, "W_hc", m.gru.w_hc);
    write_vector(out, "b_r", m.gru.b_r);
    write_vector(out, "b_u", m.gru.b_u);
    write_vector(out, "b_c", m.gru.b_c);
    if (m.readout) {
        write_matrix(out, "W_out", m.readout->w);
        write_vector(out, "b_out", m.readout->b);
    }
    out << "end\n";
    if (!out) throw std::runtime_error(path + ": write failed");
}

namespace {

Matrix read_matrix(Reader& r, const std::string& path, const char* name,
                   std::size_t want_rows, std::size_t want_cols) {
    std::istringstream ls = r.line("matrix block");
    r.keyword(ls, "matrix");
    r.keyword(ls, name);
    const std::size_t rows = r.token<std::size_t>(ls, "rows");
    const std::size_t cols = r.token<std::size_t>(ls, "cols");
    if (rows != want_rows || cols != want_cols)
        throw ValidationError(path + ": " + name + ": dimensions " + std::to_string(rows) +
                              "x" + std::to_string(cols) + " disagree with header (" +
                              std::to_string(want_rows) + "x" + std::to_string(want_cols) +
                              ")");
    Matrix m(rows, cols);
    for (std::size_t i = 0; i < rows; ++i) r.read_row(m.data() + i * cols, cols);
    return m;
}

Vector read_vector(Reader& r, const std::string& path, const char* name,
                   std::size_t want_len) {
    std::istringstream ls = r.line("vector block");
    r.keyword(ls, "vector");
    r.keyword(ls, name);
    const std::size_t len = r.token<std::size_t>(ls, "length");
    if (len != want_len)
        throw ValidationError(path + ": " + name + ": length " + std::to_string(len) +
                              " disagrees with header (" + std::to_string(want_len) + ")");
    Vector v(len);
    r.read_row(v.data(), len);
    return v;
}

} // namespace

GruModel load_model(const std::string& path) {
    Reader r(path);
    {
        std::istringstream ls = r.line("header");
        r.keyword(ls, kModelMagic);
        r.keyword(ls, kVersion);
    }
    std::size_t nx, nh, classes;
    {
        std::istringstream ls = r.line("nx");
        r.keyword(ls, "nx");
        nx = r.token<std::size_t>(ls, "input size");
    }
    {
        std::istringstream ls = r.line("nh");
        r.keyword(ls, "nh");
        nh = r.token<std::size_t>(ls, "hidden size");
    }
    {
        std::istringstream ls = r.line("classes");
        r.keyword(ls, "classes");
        classes = r.token<std::size_t>(ls, "class count");
    }
    GruModel m;
    {
        std::istringstream ls = r.line("q");
        r.keyword(ls, "q");
        std::string first = r.token<std::string>(ls, "q format");
        if (first != "none") {
            int mi = 0;
            try {
                mi = std::stoi(first);
            } catch (const std::exception&) {
                r.fail("expected integer bits or 'none'");
            }
            const int fi = r.token<int>(ls, "fractional bits");
            try {
                m.qformat = QFormat(mi, fi);
            } catch (const ContractViolation& e) {
                r.fail(e.what());
            }
        }
    }
    {
        std::istringstream ls = r.line("theta");
        r.keyword(ls, "theta");
        m.theta = r.token<double>(ls, "theta");
    }
    m.gru.w_xr = read_matrix(r, path, "W_xr", nh, nx);
    m.gru.w_xu = read_matrix(r, path, "W_xu", nh, nx);
    m.gru.w_xc = read_matrix(r, path, "W_xc", nh, nx);
    m.gru.w_hr = read_matrix(r, path, "W_hr", nh, nh);
    m.gru.w_hu = read_matrix(r, path, "W_hu", nh, nh);
    m.gru.w_hc = read_matrix(r, path, "W_hc", nh, nh);
    m.gru.b_r = read_vector(r, path, "b_r", nh);
    m.gru.b_u = read_vector(r, path, "b_u", nh);
    m.gru.b_c = read_vector(r, path, "b_c", nh);
    if (classes > 0) {
        Readout ro;
        ro.w = read_matrix(r, path, "W_out", classes, nh);
        ro.b = read_vector(r, path, "b_out", classes);
        m.readout = std::move(ro);
    }
    {
        std::istringstream ls = r.line("end");
        r.keyword(ls, "end");
    }
    try {
        m.gru.validate();
    } catch (const ContractViolation& e) {
        throw ValidationError(path + ": " + e.what());
    }
    return m;
}

} // namespace dn
