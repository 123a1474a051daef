#pragma once

#include "stablewalk/comparison.hpp"
#include "stablewalk/eigensolver.hpp"
#include "stablewalk/errors.hpp"
#include "stablewalk/generator.hpp"
#include "stablewalk/io.hpp"
#include "stablewalk/kinetics.hpp"
#include "stablewalk/particles.hpp"
#include "stablewalk/rates.hpp"
#include "stablewalk/spectrum.hpp"
#include "stablewalk/verify.hpp"
