/** Entry point: login form, then the role-appropriate surface. */

import { ApiClient, ApiError, type FetchLike } from "./api";
import { AdminDashboard } from "./dashboard";
import { AnnotatorWorkbench } from "./workbench";

function renderLogin(root: HTMLElement, api: ApiClient): void {
  root.innerHTML = "";
  const form = document.createElement("div");
  form.className = "login";
  const user = document.createElement("input");
  user.type = "text";
  user.className = "login-user";
  user.placeholder = "user id";
  const credential = document.createElement("input");
  credential.type = "password";
  credential.className = "login-credential";
  credential.placeholder = "credential";
  const submit = document.createElement("button");
  submit.type = "button";
  submit.className = "login-submit";
  submit.textContent = "log in";
  const error = document.createElement("div");
  error.className = "login-error";

  submit.addEventListener("click", () => {
    void api
      .login(user.value.trim(), credential.value)
      .then((session) => {
        root.innerHTML = "";
        if (session.user.role.kind === "annotator") {
          void new AnnotatorWorkbench(root, api, session).start();
        } else {
          void new AdminDashboard(root, api, session).start();
        }
      })
      .catch((err) => {
        error.textContent = err instanceof ApiError ? err.message : String(err);
      });
  });

  form.appendChild(user);
  form.appendChild(credential);
  form.appendChild(submit);
  form.appendChild(error);
  root.appendChild(form);
}

export function boot(root: HTMLElement, baseUrl = "", fetchFn?: FetchLike): void {
  const api = new ApiClient(baseUrl, fetchFn ?? ((url, init) => fetch(url, init)));
  renderLogin(root, api);
}

const appRoot = typeof document !== "undefined" ? document.getElementById("app") : null;
if (appRoot) {
  boot(appRoot);
}
