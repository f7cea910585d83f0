// expect: race
// A grandchild thread races with main.
int g;
void *inner(void *p) {
  g = 1;
  return NULL;
}
void *outer(void *p) {
  create(inner);
  return NULL;
}
int main() {
  create(outer);
  g = 2;
  return 0;
}
