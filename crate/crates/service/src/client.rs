//! A small blocking client for a running service.

use serde::de::DeserializeOwned;
use serde::Serialize;
use thiserror::Error;

use crate::error::ErrorBody;

#[derive(Debug, Error)]
pub enum ClientError {
    #[error("{status} {code}: {message}")]
    Api {
        status: u16,
        code: String,
        message: String,
    },
    #[error("http: {0}")]
    Transport(#[from] ureq::Error),
}

pub struct Client {
    base: String,
    agent: ureq::Agent,
    token: Option<String>,
}

impl Client {
    pub fn new(base: &str) -> Self {
        let agent = ureq::Agent::config_builder()
            .http_status_as_error(false)
            .build()
            .into();
        Self {
            base: base.trim_end_matches('/').to_owned(),
            agent,
            token: None,
        }
    }

    pub fn login(&mut self, login: &str, password: &str) -> Result<(), ClientError> {
        #[derive(serde::Deserialize)]
        struct Session {
            token: String,
        }
        let s: Session = self.post("/api/auth/login", &serde_json::json!({ "login": login, "password": password }))?;
        self.token = Some(s.token);
        Ok(())
    }

    fn finish<T: DeserializeOwned>(mut resp: ureq::http::Response<ureq::Body>) -> Result<T, ClientError> {
        let status = resp.status().as_u16();
        if status >= 400 {
            let body: ErrorBody = resp.body_mut().read_json().unwrap_or(ErrorBody {
                code: "http".into(),
                message: String::new(),
            });
            return Err(ClientError::Api {
                status,
                code: body.code,
                message: body.message,
            });
        }
        Ok(resp.body_mut().read_json()?)
    }

    pub fn get<T: DeserializeOwned>(&self, path: &str) -> Result<T, ClientError> {
        let mut req = self.agent.get(format!("{}{path}", self.base));
        if let Some(t) = &self.token {
            req = req.header("Authorization", format!("Bearer {t}"));
        }
        Self::finish(req.call()?)
    }

    pub fn post<B: Serialize, T: DeserializeOwned>(&self, path: &str, body: &B) -> Result<T, ClientError> {
        let mut req = self.agent.post(format!("{}{path}", self.base));
        if let Some(t) = &self.token {
            req = req.header("Authorization", format!("Bearer {t}"));
        }
        Self::finish(req.send_json(body)?)
    }
}
