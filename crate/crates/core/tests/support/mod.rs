#![allow(dead_code)]

pub mod zone_props;
