#pragma once

#include <map>
#include <memory>
#include <semaphore>
#include <string>

#include "auxetikit/fft_solver.hpp"
#include "auxetikit/forest.hpp"
#include "auxetikit/inverse.hpp"

namespace httplib {
class Server;
}

namespace auxetikit {

struct ServiceConfig {
   std::string model_dir;
   std::string ui_dir;          ///< static assets served under "/"; empty disables
   std::string cors_origin = "*";
   int grid_n = 128;
   double tolerance = 1e-6;
   Regime regime = Regime::PlaneStrain;
   int fft_workers = 1;         ///< concurrent FFT-backed requests
   std::size_t max_eval_count = 1000000;
};

/// The three surrogates of one shape.
struct ShapeModels {
   ForestModel c11;
   ForestModel c12;
   ForestModel c33;
};

struct ApiResponse {
   int status = 200;
   std::string body;
   std::string content_type = "application/json";
};

/// Request handlers of the HTTP API, independent of the transport. Models are
/// loaded once and treated as read-only afterwards.
class Service {
public:
   /// Loads "<shape>_<target>.json" files from cfg.model_dir; shapes with any
   /// file missing are reported as unavailable.
   explicit Service(ServiceConfig cfg);
   Service(ServiceConfig cfg, std::map<VoidShape, ShapeModels> models);

   bool has_models(VoidShape s) const { return models_.count(s) != 0; }
   const ServiceConfig& config() const { return cfg_; }

   ApiResponse predict(const std::string& body) const;
   ApiResponse inverse(const std::string& body) const;
   ApiResponse geometry(const std::map<std::string, std::string>& query) const;
   ApiResponse shapes() const;
   ApiResponse health() const;

   /// Registers all routes, CORS headers and the static UI mount.
   void mount(httplib::Server& server) const;

private:
   ServiceConfig cfg_;
   std::map<VoidShape, std::unique_ptr<ShapeModels>> models_;
   std::map<VoidShape, Surrogate> surrogates_;
   std::unique_ptr<std::counting_semaphore<256>> fft_slots_;
   std::unique_ptr<GalerkinSolver> solver_;

   void init();
};

/// Error body `{"error": {"code", "message"}}`.
ApiResponse error_response(int status, const std::string& code, const std::string& message);

/// Blocks serving the API on host:port until the process is stopped.
void serve(const Service& service, const std::string& host, int port);

} // namespace auxetikit
