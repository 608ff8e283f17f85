#include "auxetikit/dataset.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "auxetikit/error.hpp"
#include "auxetikit/rng.hpp"

namespace auxetikit {

namespace {

const char* const kHeader = "shape,d_rel,D_rel,nu,c11_over_E,c12_over_E,c33_over_E";
const char* const kMetaPrefix = "#meta: ";

using ojson = nlohmann::ordered_json;

std::string format17(double v)
{
   char buf[40];
   std::snprintf(buf, sizeof buf, "%.17g", v);
   return buf;
}

ojson meta_to_json(const DatasetMeta& m)
{
   ojson j;
   j["shape"] = std::string(to_string(m.shape));
   j["n_samples"] = m.n_samples;
   j["requested"] = m.requested;
   j["sampled"] = m.sampled;
   j["failures"] = m.failures;
   j["degenerate"] = m.degenerate;
   j["grid_n"] = m.grid_n;
   j["tolerance"] = m.tolerance;
   j["regime"] = std::string(to_string(m.regime));
   j["method"] = std::string(to_string(m.method));
   j["rng_seed"] = m.rng_seed;
   j["sampling"] = m.sampling;
   j["generator_version"] = m.generator_version;
   return j;
}

DatasetMeta meta_from_json(const nlohmann::json& j)
{
   DatasetMeta m;
   m.shape = shape_from_string(j.at("shape").get<std::string>());
   m.n_samples = j.at("n_samples").get<std::size_t>();
   m.requested = j.value("requested", m.n_samples);
   m.sampled = j.value("sampled", m.requested);
   m.failures = j.value("failures", std::size_t{0});
   m.degenerate = j.value("degenerate", std::size_t{0});
   m.grid_n = j.at("grid_n").get<int>();
   m.tolerance = j.at("tolerance").get<double>();
   m.regime = regime_from_string(j.at("regime").get<std::string>());
   m.method = method_from_string(j.value("method", std::string("sensitivity")));
   m.rng_seed = j.at("rng_seed").get<std::uint64_t>();
   m.sampling = j.value("sampling", std::string("uniform"));
   m.generator_version = j.at("generator_version").get<std::string>();
   return m;
}

double parse_number(const std::string& field, std::size_t line, const char* name)
{
   const char* begin = field.c_str();
   char* end = nullptr;
   const double v = std::strtod(begin, &end);
   if (field.empty() || end != begin + field.size())
      throw FormatError("line " + std::to_string(line) + ": cannot parse " + name + " '" + field + "'");
   if (!std::isfinite(v)) throw FormatError("line " + std::to_string(line) + ": non-finite " + name);
   return v;
}

std::string row_line(const SampleRow& r)
{
   std::string s(to_string(r.shape));
   for (double v : {r.d_rel, r.D_rel, r.nu, r.c11_over_E, r.c12_over_E, r.c33_over_E}) {
      s += ',';
      s += format17(v);
   }
   return s;
}

} // namespace

Dataset Dataset::prefix(std::size_t count) const
{
   Dataset out;
   out.meta = meta;
   const std::size_t k = std::min(count, rows.size());
   out.rows.assign(rows.begin(), rows.begin() + static_cast<std::ptrdiff_t>(k));
   out.meta.n_samples = k;
   return out;
}

SampleParams sample_at(std::size_t k, std::uint64_t seed)
{
   Rng rng = Rng::split(seed, k);
   SampleParams p;
   do {
      p.d_rel = rng.uniform();
      p.D_rel = rng.uniform();
   } while (!(p.d_rel + p.D_rel < 1.0));
   p.nu = rng.uniform(kNuMin, kNuMax);
   return p;
}

std::vector<SampleParams> sample_params(std::size_t count, std::uint64_t seed)
{
   std::vector<SampleParams> out;
   out.reserve(count);
   for (std::size_t k = 0; k < count; ++k) out.push_back(sample_at(k, seed));
   return out;
}

Dataset generate(const GenerateOptions& opt)
{
   if (opt.count == 0) throw ValidationError("sample count must be at least 1");
   if (opt.workers < 1) throw ValidationError("worker count must be at least 1");
   if (!(opt.tolerance > 0.0)) throw ValidationError("tolerance must be positive");

   GalerkinSolver solver(opt.grid_n);
   HomogenizeOptions hopt;
   hopt.n = opt.grid_n;
   hopt.tolerance = opt.tolerance;
   hopt.method = opt.method;
   hopt.regime = opt.regime;

   enum class Outcome { Ok, Failed, Degenerate };
   struct Result {
      Outcome outcome = Outcome::Failed;
      SampleRow row;
   };

   // Evaluates streams [begin, end) in parallel into `out`.
   std::mutex progress_mutex;
   std::size_t done = 0;
   auto evaluate = [&](std::size_t begin, std::size_t end, std::vector<Result>& out) {
      out.resize(end);
      std::atomic<std::size_t> next{begin};
      auto worker = [&] {
         for (std::size_t k = next++; k < end; k = next++) {
            const SampleParams p = sample_at(k, opt.seed);
            UnitCellSpec spec{opt.shape, p.d_rel, p.D_rel, BaseMaterial{1.0, p.nu}};
            Result& r = out[k];
            try {
               const auto h = homogenize(solver, spec, hopt);
               r.row = SampleRow{opt.shape, p.d_rel, p.D_rel, p.nu, h.stiffness.c11, h.stiffness.c12, h.stiffness.c33};
               r.outcome = h.stiffness.c11 > kDegenerateC11 ? Outcome::Ok : Outcome::Degenerate;
            } catch (const ConvergenceError&) {
               r.outcome = Outcome::Failed;
            }
            if (opt.progress) {
               std::lock_guard lock(progress_mutex);
               opt.progress(std::min(++done, opt.count), opt.count);
            }
         }
      };
      const int nthreads = std::min<int>(opt.workers, static_cast<int>(end - begin));
      if (nthreads <= 1) {
         worker();
      } else {
         std::vector<std::jthread> pool;
         for (int t = 0; t < nthreads; ++t) pool.emplace_back(worker);
      }
   };

   std::vector<Result> results;
   std::size_t evaluated = 0, ok = 0;
   while (ok < opt.count) {
      const std::size_t missing = opt.count - ok;
      const std::size_t end = evaluated + (evaluated == 0 ? opt.count : missing + missing / 10 + 4);
      evaluate(evaluated, end, results);
      for (std::size_t k = evaluated; k < end; ++k) ok += results[k].outcome == Outcome::Ok;
      evaluated = end;
      if (evaluated > 4 * opt.count + 100)
         throw ConvergenceError("too many failed or disconnected samples while generating the dataset");
   }

   Dataset ds;
   ds.meta.shape = opt.shape;
   ds.meta.requested = opt.count;
   ds.meta.grid_n = opt.grid_n;
   ds.meta.tolerance = opt.tolerance;
   ds.meta.regime = opt.regime;
   ds.meta.method = opt.method;
   ds.meta.rng_seed = opt.seed;
   for (std::size_t k = 0; k < evaluated && ds.rows.size() < opt.count; ++k) {
      ++ds.meta.sampled;
      switch (results[k].outcome) {
      case Outcome::Ok: ds.rows.push_back(results[k].row); break;
      case Outcome::Failed: ++ds.meta.failures; break;
      case Outcome::Degenerate: ++ds.meta.degenerate; break;
      }
   }
   ds.meta.n_samples = ds.rows.size();
   if (ds.meta.failures * 100 > ds.meta.sampled)
      throw ConvergenceError(std::to_string(ds.meta.failures) + " of " + std::to_string(ds.meta.sampled) +
                             " samples failed to converge (limit 1%)");
   return ds;
}

void write_dataset(const Dataset& ds, std::ostream& out)
{
   DatasetMeta meta = ds.meta;
   meta.n_samples = ds.rows.size();
   out << kMetaPrefix << meta_to_json(meta).dump() << '\n' << kHeader << '\n';
   for (const auto& r : ds.rows) out << row_line(r) << '\n';
}

void write_dataset(const Dataset& ds, const std::string& path)
{
   std::ofstream f(path, std::ios::binary);
   if (!f) throw Error("cannot open '" + path + "' for writing");
   write_dataset(ds, f);
   if (!f) throw Error("failed writing '" + path + "'");
}

Dataset read_dataset(std::istream& in, std::optional<VoidShape> expected_shape)
{
   std::string line;
   if (!std::getline(in, line) || line.rfind(kMetaPrefix, 0) != 0)
      throw FormatError("line 1: expected '#meta: {json}' header");
   Dataset ds;
   try {
      ds.meta = meta_from_json(nlohmann::json::parse(line.substr(std::char_traits<char>::length(kMetaPrefix))));
   } catch (const nlohmann::json::exception& e) {
      throw FormatError(std::string("line 1: invalid meta: ") + e.what());
   } catch (const ValidationError& e) {
      throw FormatError(std::string("line 1: invalid meta: ") + e.what());
   }
   if (expected_shape && *expected_shape != ds.meta.shape)
      throw FormatError("dataset shape '" + std::string(to_string(ds.meta.shape)) + "' does not match expected '" +
                        std::string(to_string(*expected_shape)) + "'");
   if (!std::getline(in, line) || line != kHeader)
      throw FormatError(std::string("line 2: expected header '") + kHeader + "'");

   std::size_t lineno = 2;
   while (std::getline(in, line)) {
      ++lineno;
      if (line.empty()) continue;
      std::vector<std::string> fields;
      std::stringstream ss(line);
      for (std::string f; std::getline(ss, f, ',');) fields.push_back(f);
      if (fields.size() != 7)
         throw FormatError("line " + std::to_string(lineno) + ": expected 7 fields, got " +
                           std::to_string(fields.size()));
      SampleRow r;
      try {
         r.shape = shape_from_string(fields[0]);
      } catch (const ValidationError& e) {
         throw FormatError("line " + std::to_string(lineno) + ": " + e.what());
      }
      if (r.shape != ds.meta.shape) throw FormatError("line " + std::to_string(lineno) + ": shape differs from meta");
      r.d_rel = parse_number(fields[1], lineno, "d_rel");
      r.D_rel = parse_number(fields[2], lineno, "D_rel");
      r.nu = parse_number(fields[3], lineno, "nu");
      r.c11_over_E = parse_number(fields[4], lineno, "c11_over_E");
      r.c12_over_E = parse_number(fields[5], lineno, "c12_over_E");
      r.c33_over_E = parse_number(fields[6], lineno, "c33_over_E");
      const std::string where = "line " + std::to_string(lineno) + ": ";
      if (r.d_rel < 0.0 || r.D_rel < 0.0 || !(r.d_rel + r.D_rel < 1.0))
         throw FormatError(where + "violates 0 <= d_rel, D_rel and d_rel + D_rel < 1");
      if (r.nu < kNuMin || r.nu > kNuMax) throw FormatError(where + "nu outside [0.2, 0.4]");
      if (!(r.c11_over_E > 0.0)) throw FormatError(where + "c11_over_E must be positive");
      ds.rows.push_back(r);
   }
   if (ds.rows.size() != ds.meta.n_samples)
      throw FormatError("meta declares " + std::to_string(ds.meta.n_samples) + " rows, file has " +
                        std::to_string(ds.rows.size()));
   return ds;
}

Dataset read_dataset(const std::string& path, std::optional<VoidShape> expected_shape)
{
   std::ifstream f(path, std::ios::binary);
   if (!f) throw Error("cannot open dataset '" + path + "'");
   return read_dataset(f, expected_shape);
}

std::string fingerprint(const Dataset& ds)
{
   std::uint64_t h = 0xcbf29ce484222325ull;
   for (const auto& r : ds.rows) {
      for (unsigned char c : row_line(r) + '\n') {
         h ^= c;
         h *= 0x100000001b3ull;
      }
   }
   char buf[17];
   std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
   return buf;
}

} // namespace auxetikit
