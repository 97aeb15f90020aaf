// Copyright 2026 The privcot Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Umbrella header. Everything except the HTTP adapter, which pulls in
// httplib and is opt-in via privcot/http_generator.hpp.

#pragma once

#include "privcot/client.hpp"
#include "privcot/datasets.hpp"
#include "privcot/embedding.hpp"
#include "privcot/errors.hpp"
#include "privcot/generator.hpp"
#include "privcot/icl.hpp"
#include "privcot/manifest.hpp"
#include "privcot/mechanism.hpp"
#include "privcot/metrics.hpp"
#include "privcot/pipeline.hpp"
#include "privcot/rng.hpp"
#include "privcot/server.hpp"
#include "privcot/sweep.hpp"
#include "privcot/synthetic.hpp"
#include "privcot/token.hpp"
#include "privcot/toy_model.hpp"
#include "privcot/transport.hpp"
#include "privcot/wire.hpp"
