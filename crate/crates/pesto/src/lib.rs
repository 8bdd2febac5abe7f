//! Crawl GitHub repositories into a candidate dataset, evaluate them under a
//! configurable model, and serve the comparison over HTTP.

pub mod github;
pub mod crawler;
pub mod compare;
pub mod server;
pub mod cli;
