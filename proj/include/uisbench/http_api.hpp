#pragma once

// HTTP/JSON front end for SessionStore. Error bodies are
// {"code": ..., "field": ..., "message": ...}; PUT /system validation
// failures add "errors": [{"field", "message"}, ...].

#include <string>

#include <httplib.h>

#include "uisbench/session.hpp"

namespace uisbench {

/// Registers every route on `server`. `store` must outlive the server.
void mount_api(httplib::Server& server, SessionStore& store);

/// HTTP status used for an error code.
int status_for(const std::string& code);

}  // namespace uisbench
