// Copyright (c) The bcb Contributors
// SPDX-License-Identifier: Apache-2.0

pub mod boogie;
pub mod classfile;
pub mod classpath;
pub mod corpus;
pub mod encode;
pub mod frames;
pub mod ir;
pub mod lift;
pub mod pipeline;
pub mod spec;
