import java.io.*;
import java.lang.*;
import java.util.*;
import java.math.*;

class FindMinDiff {

    //@ requires arr != null;
    //@ requires n > 0;
    //@ requires n == arr.length;
    //@ ensures \result >= 0;
    //@ ensures (\forall int i, j; 0 <= i && i < n && 0 <= j && j < n; Math.abs(arr[i] - arr[j]) >= \result);
    public static int findMinDiff(int[] arr, int n) {
        //@ assume n > 0 && arr != null && n == arr.length;

        int minDiff = Integer.MAX_VALUE;
        //@ maintaining minDiff == Integer.MAX_VALUE || (\forall int k; 0 <= k && k < i; minDiff <= Math.abs(arr[i] - arr[k]));
        for (int i = 0; i < n - 1; i++) {
            //@ maintaining minDiff == Integer.MAX_VALUE || (\forall int k; 0 <= k && k < i; minDiff <= Math.abs(arr[i] - arr[k]));
            for (int j = i + 1; j < n; j++) {
                int diff = Math.abs(arr[i] - arr[j]);
                //@ assert diff == Math.abs(arr[i] - arr[j]);

                if (diff < minDiff) {
                    minDiff = diff;
                }
                //@ assert minDiff <= diff;
            }
        }
        //@ assert (\forall int i, j; 0 <= i && i < n && 0 <= j && j < n; Math.abs(arr[i] - arr[j]) >= minDiff);
        return minDiff;
    }
}
