#include "auxetikit/service.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>

#include <httplib.h>
#include <json.hpp>

#include "auxetikit/error.hpp"

namespace auxetikit {

namespace {

using json = nlohmann::json;
using ojson = nlohmann::ordered_json;

ApiResponse ok_json(const ojson& j)
{
   return ApiResponse{200, j.dump(), "application/json"};
}

json parse_body(const std::string& body)
{
   try {
      json j = json::parse(body);
      if (!j.is_object()) throw ValidationError("request body must be a JSON object");
      return j;
   } catch (const json::exception& e) {
      throw ValidationError(std::string("malformed JSON: ") + e.what());
   }
}

double number_field(const json& j, const char* key)
{
   if (!j.contains(key)) throw ValidationError(std::string("missing field '") + key + "'");
   if (!j.at(key).is_number()) throw ValidationError(std::string("field '") + key + "' must be a number");
   const double v = j.at(key).get<double>();
   if (!std::isfinite(v)) throw ValidationError(std::string("field '") + key + "' must be finite");
   return v;
}

std::string string_field(const json& j, const char* key)
{
   if (!j.contains(key) || !j.at(key).is_string()) throw ValidationError(std::string("missing string field '") + key + "'");
   return j.at(key).get<std::string>();
}

double query_number(const std::map<std::string, std::string>& q, const std::string& key)
{
   auto it = q.find(key);
   if (it == q.end()) throw ValidationError("missing query parameter '" + key + "'");
   const char* begin = it->second.c_str();
   char* end = nullptr;
   const double v = std::strtod(begin, &end);
   if (it->second.empty() || end != begin + it->second.size() || !std::isfinite(v))
      throw ValidationError("query parameter '" + key + "' must be a finite number");
   return v;
}

double elapsed_ms(std::chrono::steady_clock::time_point t0)
{
   return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
}

template <class F>
ApiResponse guarded(F&& f)
{
   try {
      return f();
   } catch (const ValidationError& e) {
      return error_response(400, "invalid_request", e.what());
   } catch (const ConvergenceError& e) {
      return error_response(500, "solver_failed", e.what());
   } catch (const std::exception& e) {
      return error_response(500, "internal", e.what());
   }
}

} // namespace

ApiResponse error_response(int status, const std::string& code, const std::string& message)
{
   ojson j;
   j["error"] = {{"code", code}, {"message", message}};
   return ApiResponse{status, j.dump(), "application/json"};
}

Service::Service(ServiceConfig cfg) : cfg_(std::move(cfg))
{
   namespace fs = std::filesystem;
   for (VoidShape s : all_shapes()) {
      const fs::path dir(cfg_.model_dir);
      const fs::path p11 = dir / model_filename(s, Target::C11);
      const fs::path p12 = dir / model_filename(s, Target::C12);
      const fs::path p33 = dir / model_filename(s, Target::C33);
      if (cfg_.model_dir.empty() || !fs::exists(p11) || !fs::exists(p12) || !fs::exists(p33)) continue;
      auto m = std::make_unique<ShapeModels>(
         ShapeModels{ForestModel::load(p11.string()), ForestModel::load(p12.string()), ForestModel::load(p33.string())});
      if (m->c11.shape != s || m->c12.shape != s || m->c33.shape != s)
         throw FormatError("model files in '" + cfg_.model_dir + "' do not match their shape names");
      models_.emplace(s, std::move(m));
   }
   init();
}

Service::Service(ServiceConfig cfg, std::map<VoidShape, ShapeModels> models) : cfg_(std::move(cfg))
{
   for (auto& [s, m] : models) models_.emplace(s, std::make_unique<ShapeModels>(std::move(m)));
   init();
}

void Service::init()
{
   if (cfg_.fft_workers < 1 || cfg_.fft_workers > 256) throw ValidationError("fft_workers must be in [1, 256]");
   for (const auto& [s, m] : models_) surrogates_.emplace(s, forest_surrogate(m->c11, m->c12, m->c33));
   fft_slots_ = std::make_unique<std::counting_semaphore<256>>(cfg_.fft_workers);
   solver_ = std::make_unique<GalerkinSolver>(cfg_.grid_n);
}

ApiResponse Service::predict(const std::string& body) const
{
   return guarded([&]() -> ApiResponse {
      const auto t0 = std::chrono::steady_clock::now();
      const json req = parse_body(body);
      UnitCellSpec spec;
      spec.shape = shape_from_string(string_field(req, "shape"));
      spec.d_rel = number_field(req, "d_rel");
      spec.D_rel = number_field(req, "D_rel");
      spec.material = BaseMaterial{number_field(req, "E"), number_field(req, "nu")};
      spec.validate();
      const std::string evaluator = req.value("evaluator", std::string("surrogate"));

      std::array<double, 3> y{};
      bool out_of_range = false;
      if (evaluator == "surrogate") {
         auto it = surrogates_.find(spec.shape);
         if (it == surrogates_.end())
            return error_response(503, "models_unavailable",
                                  "no trained models loaded for shape '" + std::string(to_string(spec.shape)) + "'");
         y = it->second(spec.d_rel, spec.D_rel, spec.material.nu);
         out_of_range = !models_.at(spec.shape)->c11.in_training_box({spec.d_rel, spec.D_rel, spec.material.nu});
      } else if (evaluator == "fft") {
         HomogenizeOptions opt;
         opt.n = cfg_.grid_n;
         opt.tolerance = cfg_.tolerance;
         opt.regime = cfg_.regime;
         UnitCellSpec unit = spec;
         unit.material.E = 1.0;
         fft_slots_->acquire();
         try {
            const auto r = homogenize(*solver_, unit, opt);
            fft_slots_->release();
            y = {r.stiffness.c11, r.stiffness.c12, r.stiffness.c33};
         } catch (...) {
            fft_slots_->release();
            throw;
         }
      } else {
         throw ValidationError("evaluator must be 'surrogate' or 'fft'");
      }

      const double E = spec.material.E;
      ojson res;
      res["shape"] = std::string(to_string(spec.shape));
      res["d_rel"] = spec.d_rel;
      res["D_rel"] = spec.D_rel;
      res["c11"] = E * y[0];
      res["c12"] = E * y[1];
      res["c33"] = E * y[2];
      if (y[0] != 0.0) res["nu_eff"] = y[1] / y[0];
      else res["nu_eff"] = nullptr;
      res["evaluator"] = evaluator;
      res["out_of_range"] = out_of_range;
      res["elapsed_ms"] = elapsed_ms(t0);
      return ok_json(res);
   });
}

ApiResponse Service::inverse(const std::string& body) const
{
   return guarded([&]() -> ApiResponse {
      const json req = parse_body(body);
      const VoidShape shape = shape_from_string(string_field(req, "shape"));
      const double E = number_field(req, "E");
      const double nu = number_field(req, "nu");
      BaseMaterial{E, nu}.validate();
      std::optional<double> c11, c12, c33;
      if (req.contains("targets")) {
         const json& t = req.at("targets");
         if (!t.is_object()) throw ValidationError("'targets' must be an object");
         if (t.contains("c11") && !t.at("c11").is_null()) c11 = number_field(t, "c11");
         if (t.contains("c12") && !t.at("c12").is_null()) c12 = number_field(t, "c12");
         if (t.contains("c33") && !t.at("c33").is_null()) c33 = number_field(t, "c33");
      }
      const InverseTarget target = InverseTarget::from_stress(c11, c12, c33, E);
      target.validate();

      InverseOptions opt;
      if (req.contains("eval_count")) {
         if (!req.at("eval_count").is_number_integer() || req.at("eval_count").get<long long>() < 1)
            throw ValidationError("'eval_count' must be a positive integer");
         opt.eval_count = req.at("eval_count").get<std::size_t>();
         if (opt.eval_count > cfg_.max_eval_count)
            throw ValidationError("'eval_count' exceeds the limit of " + std::to_string(cfg_.max_eval_count));
      }
      if (req.contains("threshold")) opt.threshold = number_field(req, "threshold");

      auto it = surrogates_.find(shape);
      if (it == surrogates_.end())
         return error_response(503, "models_unavailable",
                               "no trained models loaded for shape '" + std::string(to_string(shape)) + "'");
      const InverseResult r = brute_force(it->second, target, nu, opt);
      ojson res = r.to_json();
      res["geometry"] = {{"shape", std::string(to_string(shape))}, {"d_rel", r.d_rel}, {"D_rel", r.D_rel}};
      const auto y = it->second(r.d_rel, r.D_rel, nu);
      res["predicted"] = {{"c11", E * y[0]}, {"c12", E * y[1]}, {"c33", E * y[2]}};
      return ok_json(res);
   });
}

ApiResponse Service::geometry(const std::map<std::string, std::string>& query) const
{
   return guarded([&]() -> ApiResponse {
      auto it = query.find("shape");
      if (it == query.end()) throw ValidationError("missing query parameter 'shape'");
      UnitCellSpec spec;
      spec.shape = shape_from_string(it->second);
      spec.d_rel = query_number(query, "d_rel");
      spec.D_rel = query_number(query, "D_rel");
      spec.validate();
      return ApiResponse{200, to_svg(spec), "image/svg+xml"};
   });
}

ApiResponse Service::shapes() const
{
   ojson list = ojson::array();
   for (VoidShape s : all_shapes()) list.push_back({{"name", std::string(to_string(s))}, {"available", has_models(s)}});
   ojson res;
   res["shapes"] = std::move(list);
   return ok_json(res);
}

ApiResponse Service::health() const
{
   return ok_json(ojson{{"status", "ok"}});
}

void Service::mount(httplib::Server& server) const
{
   auto send = [](httplib::Response& res, const ApiResponse& r) {
      res.status = r.status;
      res.set_content(r.body, r.content_type);
   };
   server.Post("/api/predict", [this, send](const httplib::Request& req, httplib::Response& res) {
      send(res, predict(req.body));
   });
   server.Post("/api/inverse", [this, send](const httplib::Request& req, httplib::Response& res) {
      send(res, inverse(req.body));
   });
   server.Get("/api/geometry", [this, send](const httplib::Request& req, httplib::Response& res) {
      std::map<std::string, std::string> q;
      for (const auto& [k, v] : req.params) q[k] = v;
      send(res, geometry(q));
   });
   server.Get("/api/shapes", [this, send](const httplib::Request&, httplib::Response& res) { send(res, shapes()); });
   server.Get("/healthz", [this, send](const httplib::Request&, httplib::Response& res) { send(res, health()); });
   server.Options(R"(/api/.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });

   const std::string origin = cfg_.cors_origin;
   server.set_post_routing_handler([origin](const httplib::Request&, httplib::Response& res) {
      res.set_header("Access-Control-Allow-Origin", origin);
      res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
      res.set_header("Access-Control-Allow-Headers", "Content-Type");
   });
   server.set_error_handler([send](const httplib::Request&, httplib::Response& res) {
      if (!res.body.empty()) return;
      if (res.status == 404) send(res, error_response(404, "not_found", "no such endpoint"));
      else send(res, error_response(res.status, "http_error", "request failed"));
   });
   if (!cfg_.ui_dir.empty() && std::filesystem::is_directory(cfg_.ui_dir)) server.set_mount_point("/", cfg_.ui_dir);
}

void serve(const Service& service, const std::string& host, int port)
{
   httplib::Server server;
   service.mount(server);
   if (!server.listen(host, port)) throw Error("cannot listen on " + host + ":" + std::to_string(port));
}

} // namespace auxetikit
