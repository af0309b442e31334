import { App } from './app.js';

const root = document.getElementById('root');
if (root === null) throw new Error('missing #root element');
new App(root).start();
