#include "guru/model_io.hpp"

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "guru/error.hpp"
#include "guru/format.hpp"

namespace guru {

std::string model_kind(const AnyModel& model) {
  switch (model.index()) {
    case 0:
      return "linear";
    case 1:
      return "multiclass";
    default:
      return "kernel";
  }
}

namespace {

void write_values(std::ostream& out, std::span<const double> v) {
  for (double x : v) out << ' ' << format_double(x);
}

std::string hex64(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016" PRIx64, h);
  return buf;
}

}  // namespace

void write_model(std::ostream& out, const SavedModel& saved, bool embed_samples) {
  if (saved.algo.find_first_of(" \t\n") != std::string::npos || saved.algo.empty()) {
    throw std::invalid_argument("algo tag must be a single non-empty word");
  }
  out << "guru-model " << kModelFormatVersion << '\n';
  out << "algo " << saved.algo << '\n';
  out << "kind " << model_kind(saved.model) << '\n';
  if (const auto* lin = std::get_if<LinearModel>(&saved.model)) {
    out << "sigma " << format_double(lin->sigma()) << '\n';
    out << "dim " << lin->dim() << '\n';
    out << "w";
    write_values(out, lin->w());
    out << '\n';
  } else if (const auto* mc = std::get_if<MulticlassModel>(&saved.model)) {
    out << "sigma " << format_double(mc->sigma()) << '\n';
    out << "dim " << mc->dim() << '\n';
    out << "classes " << mc->num_classes() << '\n';
    for (int c = 1; c <= static_cast<int>(mc->num_classes()); ++c) {
      out << "w " << c;
      write_values(out, mc->w(c));
      out << '\n';
    }
  } else {
    const auto& km = std::get<KernelModel>(saved.model);
    const Dataset& train = km.train();
    out << "sigma " << format_double(km.sigma()) << '\n';
    out << "dim " << train.dim() << '\n';
    out << "kernel " << km.kernel().to_string() << '\n';
    out << "samples " << km.size() << '\n';
    out << "nu " << format_double(km.nu()) << '\n';
    out << "train_hash " << hex64(content_hash(train)) << '\n';
    out << "alpha";
    write_values(out, km.alphas());
    out << '\n';
    out << "embedded " << (embed_samples ? 1 : 0) << '\n';
    if (embed_samples) {
      for (std::size_t m = 0; m < train.size(); ++m) {
        out << "x " << train.y(m);
        write_values(out, train.x(m));
        out << '\n';
      }
    }
  }
  out << "end\n";
}

namespace {

class LineReader {
 public:
  explicit LineReader(std::istream& in) : in_(in) {}

  // Next line split into tokens; the first must equal `key`.
  std::vector<std::string> expect(std::string_view key) {
    std::string line;
    if (!std::getline(in_, line)) fail("unexpected end of model, wanted '" + std::string(key) + "'");
    ++line_no_;
    std::istringstream ss(line);
    std::vector<std::string> tokens;
    for (std::string t; ss >> t;) tokens.push_back(std::move(t));
    if (tokens.empty() || tokens.front() != key) {
      fail("expected '" + std::string(key) + "'");
    }
    return tokens;
  }

  template <class Int>
  Int integer(std::string_view key) {
    const auto t = expect(key);
    if (t.size() != 2) fail("'" + std::string(key) + "' takes one value");
    const auto v = parse_integer<Int>(t[1]);
    if (!v) fail("bad integer for '" + std::string(key) + "'");
    return *v;
  }

  double real(std::string_view key) {
    const auto t = expect(key);
    if (t.size() != 2) fail("'" + std::string(key) + "' takes one value");
    return number(t[1]);
  }

  Vector values(const std::vector<std::string>& tokens, std::size_t first, std::size_t count) {
    if (tokens.size() != first + count) {
      fail("expected " + std::to_string(count) + " values, got " +
           std::to_string(tokens.size() >= first ? tokens.size() - first : 0));
    }
    Vector v(count);
    for (std::size_t i = 0; i < count; ++i) v[i] = number(tokens[first + i]);
    return v;
  }

  double number(const std::string& s) {
    const auto v = parse_double(s);
    if (!v) fail("bad number '" + s + "'");
    return *v;
  }

  [[noreturn]] void fail(const std::string& msg) const {
    throw DataError("model line " + std::to_string(line_no_) + ": " + msg);
  }

 private:
  std::istream& in_;
  std::size_t line_no_ = 0;
};

}  // namespace

SavedModel read_model(std::istream& in, const Dataset* train) {
  LineReader r(in);
  const int version = r.integer<int>("guru-model");
  if (version != kModelFormatVersion) {
    r.fail("unsupported model format version " + std::to_string(version));
  }
  const auto algo = r.expect("algo");
  if (algo.size() != 2) r.fail("'algo' takes one value");
  const auto kind = r.expect("kind");
  if (kind.size() != 2) r.fail("'kind' takes one value");
  const double sigma = r.real("sigma");
  const auto dim = r.integer<std::size_t>("dim");

  auto finish = [&](AnyModel model) {
    r.expect("end");
    return SavedModel{algo[1], std::move(model)};
  };

  if (kind[1] == "linear") {
    Vector w = r.values(r.expect("w"), 1, dim);
    return finish(LinearModel(std::move(w), sigma));
  }
  if (kind[1] == "multiclass") {
    const auto classes = r.integer<std::size_t>("classes");
    std::vector<Vector> ws;
    for (std::size_t c = 1; c <= classes; ++c) {
      const auto t = r.expect("w");
      if (t.size() < 2 || parse_integer<std::size_t>(t[1]) != c) r.fail("class vectors out of order");
      ws.push_back(r.values(t, 2, dim));
    }
    return finish(MulticlassModel(std::move(ws), sigma));
  }
  if (kind[1] == "kernel") {
    const auto ktok = r.expect("kernel");
    if (ktok.size() != 2) r.fail("'kernel' takes one value");
    const KernelSpec kernel = KernelSpec::parse(ktok[1]);
    const auto samples = r.integer<std::size_t>("samples");
    const double nu = r.real("nu");
    const auto htok = r.expect("train_hash");
    if (htok.size() != 2) r.fail("'train_hash' takes one value");
    std::uint64_t hash = 0;
    const auto hres = std::from_chars(htok[1].data(), htok[1].data() + htok[1].size(), hash, 16);
    if (hres.ec != std::errc() || hres.ptr != htok[1].data() + htok[1].size()) r.fail("bad train_hash");
    Vector alphas = r.values(r.expect("alpha"), 1, samples);
    const auto embedded = r.integer<int>("embedded");
    std::shared_ptr<const Dataset> data;
    if (embedded == 1) {
      std::vector<Vector> xs;
      std::vector<int> ys;
      for (std::size_t m = 0; m < samples; ++m) {
        const auto t = r.expect("x");
        if (t.size() < 2) r.fail("sample line needs a label");
        const auto y = parse_integer<int>(t[1]);
        if (!y) r.fail("bad sample label");
        ys.push_back(*y);
        xs.push_back(r.values(t, 2, dim));
      }
      data = std::make_shared<const Dataset>("embedded", std::move(xs), std::move(ys),
                                             TaskType::Binary, 0, dim);
    } else if (embedded == 0) {
      if (!train) r.fail("kernel model has no embedded samples; training data required");
      data = std::make_shared<const Dataset>(*train);
    } else {
      r.fail("'embedded' must be 0 or 1");
    }
    if (data->size() != samples || data->dim() != dim) r.fail("training data shape mismatch");
    if (content_hash(*data) != hash) r.fail("training data hash mismatch");
    return finish(KernelModel::restore(std::move(data), kernel, sigma, std::move(alphas), nu));
  }
  r.fail("unknown model kind '" + kind[1] + "'");
}

void save_model(const std::filesystem::path& path, const SavedModel& saved, bool embed_samples) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  write_model(out, saved, embed_samples);
  if (!out) throw DataError("write failed for " + path.string());
}

SavedModel load_model(const std::filesystem::path& path, const Dataset* train) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open model file " + path.string());
  return read_model(in, train);
}

}  // namespace guru
