// Copyright 2026 The relaykey Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef RELAYKEY_RELAYKEY_HPP_
#define RELAYKEY_RELAYKEY_HPP_

#include "relaykey/codebook.hpp"
#include "relaykey/error.hpp"
#include "relaykey/format.hpp"
#include "relaykey/gaussian.hpp"
#include "relaykey/optimizer.hpp"
#include "relaykey/prob.hpp"
#include "relaykey/protocol.hpp"
#include "relaykey/random.hpp"
#include "relaykey/rate_regions.hpp"
#include "relaykey/selftest.hpp"
#include "relaykey/table_io.hpp"
#include "relaykey/typicality.hpp"

#endif  // RELAYKEY_RELAYKEY_HPP_
