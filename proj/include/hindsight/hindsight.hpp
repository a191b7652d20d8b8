#pragma once
// Umbrella header for the hindsight agent-memory engine.

#include "hindsight/bank.hpp"
#include "hindsight/cli.hpp"
#include "hindsight/engine.hpp"
#include "hindsight/entity_resolution.hpp"
#include "hindsight/lexical_index.hpp"
#include "hindsight/links.hpp"
#include "hindsight/mock_providers.hpp"
#include "hindsight/providers.hpp"
#include "hindsight/recall.hpp"
#include "hindsight/reflect.hpp"
#include "hindsight/retain.hpp"
#include "hindsight/serialization.hpp"
#include "hindsight/service.hpp"
#include "hindsight/store.hpp"
#include "hindsight/temporal.hpp"
#include "hindsight/text.hpp"
#include "hindsight/time.hpp"
#include "hindsight/types.hpp"
#include "hindsight/vector_index.hpp"
