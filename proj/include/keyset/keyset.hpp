#pragma once

#include "keyset/armstrong.hpp"
#include "keyset/attribute_set.hpp"
#include "keyset/bench.hpp"
#include "keyset/cnf.hpp"
#include "keyset/error.hpp"
#include "keyset/implication.hpp"
#include "keyset/inference.hpp"
#include "keyset/ingest.hpp"
#include "keyset/key_set.hpp"
#include "keyset/relation.hpp"
#include "keyset/validation.hpp"
